"""
.. See the NOTICE file distributed with this work for additional information
   regarding copyright ownership.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""


from setuptools import setup, find_packages

setup(
    name='dscv-engine',

    version='0.1.0',
    description='Static/dynamic cost-volume depth engine for scenes with moving objects',

    license='Apache-2.0',

    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    include_package_data=True,
    python_requires='>=3.8',
    install_requires=[
        'numpy', 'scipy', 'Pillow', 'pytest'
    ],
    setup_requires=[
        'pytest-runner',
    ],

    tests_require=[
        'pytest',
    ],
    entry_points={
        'console_scripts': [
            'dscv=apps.cli:main',
        ],
    },
)
