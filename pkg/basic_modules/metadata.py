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

import copy
import json
import os

# file extension -> (data_type, file_type) for inputs that arrive without
# metadata of their own
_KNOWN_TYPES = {
    ".png": ("image", "PNG"),
    ".pfm": ("depth", "PFM"),
    ".flo": ("flow", "FLO"),
    ".dscv": ("cost_volume", "DSCV"),
    ".dsfw": ("fusion_weights", "DSFW"),
    ".json": ("document", "JSON"),
    ".csv": ("histogram", "CSV"),
}


class Metadata(object):  # pylint: disable=too-few-public-methods
    """
    Object containing all information pertaining to a specific data element
    (an image, depth map, flow field, cost volume, report...).
    """

    def __init__(self, data_type=None, file_type=None, file_path=None,  # pylint: disable=too-many-arguments
                 sources=None, meta_data=None):
        """
        Initialise the Metadata.


        Parameters
        ----------
        data_type : str
            The type of information in the file (e.g. "depth", "flow")
        file_type : str
            File format (e.g. "PFM", "FLO", "DSCV")
        file_path : str
            Path of the file
        sources : list
            List of paths of files that were processed to generate this file
        meta_data : dict
            Dictionary object containing the extra data related to the
            generation of the file or describing the way it was processed
            (the echoed run configuration, reports, ...)
        """
        self.data_type = data_type
        self.file_type = file_type
        self.file_path = file_path
        if sources is None:
            sources = []
        self.sources = sources
        if meta_data is None:
            meta_data = {}
        self.meta_data = meta_data
        self.exception = None

    @classmethod
    def for_path(cls, path):
        """
        Stub metadata for an input file, typed from its extension.
        """
        if isinstance(path, (list, tuple)):
            return [cls.for_path(item) for item in path]
        data_type, file_type = _KNOWN_TYPES.get(
            os.path.splitext(str(path))[1].lower(), (None, None))
        return cls(data_type, file_type, path)

    @classmethod
    def get_child(cls, parents, path, data_type=None, file_type=None):
        """
        Generate a stub for the metadata of a new data element generated
        from the data element described in the specified parents.

        Fields "data_type" and "file_type" are taken from the first parent
        unless given; the "meta_data" fields are merged from all parents, in
        their respective order (i.e. values in the last parent prevail).

        While making a copy, ensure the copy is deep enough that changing the
        child instance will not affect the parents.


        Parameters
        ----------
        parents : list
            List of Metadata instances
        path : str
            Path of the new data element


        Returns
        -------
        Metadata
            An instance of Metadata generated as described above


        Example
        -------
        >>> cv_md = Metadata("cost_volume", "DSCV", "cv.dscv")
        >>> depth_md = Metadata.get_child([cv_md], "depth.pfm", "depth", "PFM")
        >>> depth_md.sources
        ['cv.dscv']
        """
        if isinstance(parents, (list, tuple)) is False:
            parents = (parents,)
        parents = [parent for parent in parents if parent is not None]
        if not parents:
            return cls(data_type, file_type, path)
        meta_data = copy.deepcopy(parents[0].meta_data)

        for parent in parents[1:]:
            meta_data.update(copy.deepcopy(parent.meta_data))

        return cls(data_type or parents[0].data_type,
                   file_type or parents[0].file_type,
                   path,
                   sources=[parent.file_path for parent in parents],
                   meta_data=meta_data)

    def set_exception(self, exception):
        """
        Attach the failure that prevented this data element from being
        produced, so that the wrapping App can report it.
        """
        self.exception = exception

    def to_dict(self):
        record = {
            "data_type": self.data_type,
            "file_type": self.file_type,
            "file_path": self.file_path,
            "sources": list(self.sources),
            "meta_data": self.meta_data,
        }
        if self.exception is not None:
            record["exception"] = "{}: {}".format(type(self.exception).__name__, self.exception)
        return record

    @classmethod
    def from_dict(cls, record):
        return cls(record.get("data_type"), record.get("file_type"), record.get("file_path"),
                   record.get("sources"), record.get("meta_data"))

    def write_sidecar(self, path=None):
        """
        Write the metadata next to its file as ``<file>.json``.

        Returns
        -------
        str
            path of the sidecar.
        """
        if path is None:
            path = "{}.json".format(self.file_path)
        with open(path, "w") as handle:
            json.dump(self.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
        return path
