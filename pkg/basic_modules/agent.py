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

from basic_modules.config import RunConfig
from basic_modules.metadata import Metadata
from utils import logger
from utils.errors import UsageError


# -----------------------------------------------------------------------------
# Main Agent interface
# -----------------------------------------------------------------------------

class Agent(object):  # pylint: disable=too-few-public-methods
    """
    Abstract class describing a specific operation on a precise input data type
    to produce a precise output data type.

    The agent is executed by calling its "run()" method, which should support
    multiple inputs and outputs. Inputs and outputs are valid file names
    locally accessible to the Agent, associated with their role.

    The "run()" method also receives an instance of Metadata for each of the
    input data elements. It is the Agent's responsibility to generate the
    metadata for each of the output data elements, which are returned in a
    tuple (see code below).

    The configuration mixes two kinds of keys: those of RunConfig, shared by
    every agent, and the agent's own options, declared with their defaults in
    the class attribute ``options`` (e.g. the loss kind).

    See also Workflow.
    """
    options = {}

    def __init__(self, configuration=None, executor=None):
        """
        Initialise the agent with its configuration.


        Parameters
        ----------
        configuration : dict
            a dictionary containing parameters that define how the operation
            should be carried out: RunConfig keys plus the agent's options.
        executor : concurrent.futures.Executor, optional
            pool on which independent work (depth bins) may be spread; the
            agent runs serially without one.
        """
        if configuration is None:
            configuration = {}

        self.configuration = dict(configuration)
        self.option_values = {name: self.configuration.pop(name, default)
                              for name, default in self.options.items()}
        self.run_config = RunConfig.from_dict(self.configuration)
        self.executor = executor

    def option(self, name):
        return self.option_values[name]

    @staticmethod
    def require(files, *roles):
        """
        Return the paths of the required roles, in order.

        Raises
        ------
        UsageError
            naming the first missing role.
        """
        missing = [role for role in roles if not files.get(role)]
        if missing:
            raise UsageError("missing required file for role '{}'".format(missing[0]))
        return [files[role] for role in roles]

    def make_metadata(self, input_metadata, roles, path, data_type, file_type, **meta):  # pylint: disable=too-many-arguments
        """
        Metadata of an output derived from the inputs with the given roles;
        the echoed run configuration and ``meta`` are added to its meta_data.
        """
        parents = []
        for role in roles:
            parent = input_metadata.get(role)
            if isinstance(parent, (list, tuple)):
                parents.extend(parent)
            elif parent is not None:
                parents.append(parent)
        metadata = Metadata.get_child(parents, path, data_type, file_type)
        metadata.meta_data["config"] = self.run_config.to_dict(echo=True)
        metadata.meta_data.update(meta)
        return metadata

    def run(self, input_files, input_metadata, output_files):
        """
        Perform the required operations to achieve the functionality of the
        Agent. This usually involves:
        1. Perform relevant checks on input data
        2. Read the inputs into engine types
        3. Perform agent-specific operations
        4. Write the outputs
        5. Write metadata for the output data

        Failures are raised as DSCVError subclasses; the wrapping App logs
        them and attaches them to the output metadata.


        Parameters
        ----------
        input_files : dict
            a dict of absolute path names of the input data elements,
            associated with their role;
        input_metadata : dict
            a dict of metadatas for each of the input data elements,
            associated with their role;
        output_files : dict
            a dict of absolute path names of the output data elements,
            associated with their role.


        Returns
        -------
        (output_files, output_metadata)
          output_files : dict
              a dict of absolute path names of the output data elements created
              by the Agent, associated with their role;
          output_metadata : dict
              a dict of metadatas for each of the output data elements created
              by the Agent, associated with their role;


        Example
        -------
        >>> from agents.depth_agent import DepthAgent
        >>> agent = DepthAgent({})
        >>> agent.run({"cost_volume": "fused.dscv"}, {}, {"depth": "depth.pfm"})
        ({'depth': 'depth.pfm'}, {'depth': <Metadata>})
        """
        logger.error("{} does not implement run()", type(self).__name__)
        raise NotImplementedError
