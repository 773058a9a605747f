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

# -----------------------------------------------------------------------------
# Thread-pool App
# -----------------------------------------------------------------------------
from concurrent.futures import ThreadPoolExecutor

from basic_modules.app import App
from basic_modules.config import resolve_threads
from utils import logger


class PoolApp(App):  # pylint: disable=too-few-public-methods
    """
    PoolApp: owns the worker pool of a run.

    The pool is sized from the thread count (``threads`` in the
    configuration, overridden by the DSCV_THREADS environment variable or an
    explicit ``threads`` argument) and handed to the Agent; with a single
    thread no pool is created and the Agent runs serially. The pool is shut
    down once the Agent has finished, whether or not it succeeded.
    """

    def __init__(self, threads=None):
        self.threads = threads
        self.executor = None

    def _instantiate_agent(self, agent_class, configuration):
        configuration = dict(configuration or {})
        threads = resolve_threads(self.threads, configuration.get("threads"))
        configuration["threads"] = threads
        if threads > 1:
            logger.info("Starting a pool of {} worker threads", threads)
            self.executor = ThreadPoolExecutor(max_workers=threads)
        return agent_class(configuration, self.executor)

    def _release(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None
        super(PoolApp, self)._release()
