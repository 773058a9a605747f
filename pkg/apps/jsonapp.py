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
import json
import os

from apps.workflowapp import WorkflowApp
from basic_modules.metadata import Metadata
from engine.formats import read_json
from utils import logger
from utils.errors import BadHeader, DSCVError

# -----------------------------------------------------------------------------
# JSON-configured App
# -----------------------------------------------------------------------------


class JSONApp(WorkflowApp):  # pylint: disable=too-few-public-methods
    """
    JSON-configured App.

    Redefines launch to the following signature (see launch for details)

    launch(agent_class, config_path, results_path, overrides)

    """

    # The arguments differ between this function and the superclass in
    # basic_modules.app so that a run configuration file can provide the
    # parameters required by App.
    def launch(self, agent_class,  # pylint: disable=arguments-differ,too-many-arguments
               config_path=None, results_path=None, overrides=None,
               input_files=None, output_files=None):
        """
        Run a Agent with the inputs, outputs and arguments of a run
        configuration file.


        Parameters
        ----------
        agent_class : class
            the subclass of Agent to be run;
        config_path : str, optional
            path to a run configuration file:
            ``{"input_files": {role: path or [paths]},
            "output_files": {role: path}, "arguments": {key: value}}``;
            relative paths are resolved against the file's directory. Without
            it the run uses defaults only;
        results_path : str, optional
            path to write the JSON file listing every output with its
            metadata (or the exception that prevented it); the
            intermediates of a Workflow follow, with ``"intermediate": true``;
        overrides : dict, optional
            arguments taking precedence over those of the file (e.g. command
            line flags);
        input_files, output_files : dict, optional
            roles taking precedence over those of the file.


        Returns
        -------
        (output_files, output_metadata)
            as App.launch.


        Example
        -------
        >>> from agents.depth_agent import DepthAgent
        >>> app = JSONApp()
        >>> app.launch(DepthAgent, "/path/to/run.json", "/path/to/results.json")
        >>> # writes /path/to/results.json
        """
        self.intermediates = {}
        logger.info("0) Unpack information from JSON")
        config_inputs, config_outputs, arguments = self._read_config(config_path)
        config_inputs.update(input_files or {})
        config_outputs.update(output_files or {})
        arguments.update(overrides or {})

        try:
            output_files, output_metadata = super(JSONApp, self).launch(
                agent_class, config_inputs, {}, config_outputs, arguments)
        except DSCVError:
            if results_path is not None:
                self._write_results(config_outputs, self.failed_metadata, results_path)
            raise

        if results_path is not None:
            logger.info("4) Pack information to JSON")
            self._write_results(output_files, output_metadata, results_path,
                                self.intermediates)
        return output_files, output_metadata

    def _post_run(self, agent_instance, output_files, output_metadata):
        # Workflows expose the outputs of their inner Agents
        self.intermediates = dict(getattr(agent_instance, "intermediates", {}))
        return super(JSONApp, self)._post_run(agent_instance, output_files, output_metadata)

    @staticmethod
    def _read_config(json_path):
        """
        Read a run configuration file to obtain:

            - input_files: dict of absolute input paths by role (a role may
              list several files)
            - output_files: dict of absolute output paths by role
            - arguments: dict of RunConfig keys and agent options
        """
        if json_path is None:
            return {}, {}, {}
        configuration = read_json(json_path)
        if not isinstance(configuration, dict):
            raise BadHeader("{}: run configuration must be a JSON object".format(json_path))
        base = os.path.dirname(os.path.abspath(json_path))

        def _resolve(path):
            if path is None:
                return None
            if isinstance(path, (list, tuple)):
                return [_resolve(item) for item in path]
            return os.path.normpath(os.path.join(base, path))

        input_files = {role: _resolve(path)
                       for role, path in configuration.get("input_files", {}).items()}
        output_files = {role: _resolve(path)
                        for role, path in configuration.get("output_files", {}).items()}
        arguments = dict(configuration.get("arguments", {}))
        return input_files, output_files, arguments

    @staticmethod
    def _write_results(output_files, output_metadata, json_path, intermediates=None):
        """
        Write the results file: one record per output role, with the
        metadata of the output (including the exception, if the run failed),
        followed by the intermediates of a Workflow, flagged as such.
        """
        def _record(role, path, metadata, **flags):
            if metadata is None:
                metadata = Metadata(file_path=path)
            result = {"name": role}
            result.update(flags)
            result.update(metadata.to_dict())
            return result

        results = [_record(role, path, output_metadata.get(role))
                   for role, path in output_files.items()]
        for role, (path, metadata) in (intermediates or {}).items():
            results.append(_record(role, path, metadata, intermediate=True))

        with open(json_path, mode="w", encoding="utf-8") as handle:
            json.dump({"output_files": results}, handle, indent=2, separators=(",", ": "))
            handle.write("\n")
        return os.path.isfile(json_path)
