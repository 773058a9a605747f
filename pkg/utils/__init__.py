#!/usr/bin/env python
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


def remap(indict, *args, **kwargs):
    """
    Re-map the roles of a file (or metadata) dict before handing it to the
    next stage of a workflow.

    Non-keyword arguments are roles passed unchanged. Keyword arguments are
    in the form ``new="old"`` and rename a role; roles absent from indict
    are skipped, so optional inputs (e.g. ``weights``) can be listed
    unconditionally.

    Example
    -------
    >>> remap({"depth_t": "d.pfm", "image_t": "a.png"}, "image_t", gt="depth_t")
    {'image_t': 'a.png', 'gt': 'd.pfm'}
    """
    outdict = {role: indict[role] for role in args if role in indict}
    outdict.update(
        {new: indict[old] for new, old in kwargs.items() if old in indict}
    )
    return outdict
