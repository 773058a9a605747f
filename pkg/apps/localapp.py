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

import os

# -----------------------------------------------------------------------------
# Local Filesystem App
# -----------------------------------------------------------------------------
from basic_modules.app import App
from utils import logger
from utils.errors import MissingInput


class LocalApp(App):  # pylint: disable=too-few-public-methods
    """
    Local Filesystem App.

    Checks that every input exists before the Agent runs, creates the parent
    directories of the outputs, and writes a ``<output>.json`` sidecar with
    the metadata of every output afterwards, so each result is
    self-describing.
    """

    def _pre_run(self, input_files, input_metadata, output_files):
        for role, paths in input_files.items():
            if paths is None:
                continue
            for path in paths if isinstance(paths, (list, tuple)) else [paths]:
                if not os.path.isfile(path):
                    raise MissingInput("input '{}' not found: {}".format(role, path))
        for path in output_files.values():
            if path:
                parent = os.path.dirname(os.path.abspath(path))
                if not os.path.isdir(parent):
                    logger.debug("creating output directory {}", parent)
                    os.makedirs(parent, exist_ok=True)
        return super(LocalApp, self)._pre_run(input_files, input_metadata, output_files)

    def _post_run(self, agent_instance, output_files, output_metadata):
        for role, path in output_files.items():
            metadata = output_metadata.get(role)
            if path and metadata is not None:
                metadata.write_sidecar()
        return super(LocalApp, self)._post_run(agent_instance, output_files, output_metadata)
