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

from agents.pipeline import DepthPipeline
from utils import logger

DEMO_DIR = os.path.dirname(os.path.abspath(__file__))
SCENE_FILE = os.path.join(DEMO_DIR, "agents_demos", "scene.json")
OUTPUT_DIR = os.path.join(DEMO_DIR, "demo_output")


# -----------------------------------------------------------------------------

def main(input_files, input_metadata, output_files, configuration=None):
    """
    Main function
    -------------

    This function launches the DepthPipeline in the WorkflowApp: inputs are
    checked, intermediates land next to the report, and every output gets a
    metadata sidecar.
    """

    # 1. Instantiate and launch the App
    logger.info("1. Instantiate and launch the App")
    from apps.workflowapp import WorkflowApp  # pylint: disable=import-outside-toplevel
    app = WorkflowApp()
    result = app.launch(DepthPipeline, input_files, input_metadata,
                        output_files, configuration or {})

    # 2. The App has finished
    logger.info("2. Execution finished")

    return result


def main_json():
    """
    Alternative main function
    -------------

    This function launches the app using the run configuration written in
    agents_demos/pipeline_run.json.
    """
    # 1. Instantiate and launch the App
    logger.info("1. Instantiate and launch the App")
    from apps.jsonapp import JSONApp  # pylint: disable=import-outside-toplevel
    app = JSONApp()
    result = app.launch(DepthPipeline,
                        os.path.join(DEMO_DIR, "agents_demos", "pipeline_run.json"),
                        os.path.join(OUTPUT_DIR, "results.json"))

    # 2. The App has finished
    logger.info("2. Execution finished; see {}", os.path.join(OUTPUT_DIR, "results.json"))

    return result


if __name__ == "__main__":
    _, METADATA = main({"scene": SCENE_FILE}, {},
                       {"report": os.path.join(OUTPUT_DIR, "report.json")},
                       {"d_min": 2.0, "d_max": 20.0, "n_bins": 32})

    REPORT = METADATA["report"].meta_data["report"]
    for name in ("static", "dynamic", "fused"):
        logger.info("{:>8}: AbsRel {:.4f} overall, {:.4f} on the object", name,
                    REPORT[name]["all"]["abs_rel"], REPORT[name]["object"]["abs_rel"])
    print(json.dumps(REPORT, indent=2, sort_keys=True))

    main_json()
