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
# Exception hierarchy
# -----------------------------------------------------------------------------
#
# Every error raised by the engine derives from DSCVError. The two families
# map onto the command-line exit codes: ValidationError -> 1, FormatError
# (and plain OSError) -> 2.


class DSCVError(Exception):
    """
    Root of all engine errors.
    """
    exit_code = 1


class ValidationError(DSCVError):
    """
    Inputs violate a precondition of an operation.
    """
    exit_code = 1


class FormatError(DSCVError):
    """
    A file could not be read or written in the expected format.
    """
    exit_code = 2


# Validation family

class NonPositiveDepth(ValidationError):
    """A depth (or point z) that must be positive is not."""


class ShapeMismatch(ValidationError):
    """Grids that must share a shape do not."""


class InvalidTarget(ValidationError):
    """Upsampling target smaller than its source."""


class InvalidRange(ValidationError):
    """Degenerate depth-hypothesis bounds or bin count."""


class HypothesisMismatch(ValidationError):
    """Cost volumes built over different hypothesis sets."""


class WeightDimMismatch(ValidationError):
    """Fusion weights are not dimensioned 2N -> N for the volumes."""


class ZeroMeanDisparity(ValidationError):
    """Disparity map with zero spatial mean cannot be normalised."""


class NoValidPixels(ValidationError):
    """No pixel survives the evaluation mask."""


class DegenerateScene(ValidationError):
    """A synthetic scene puts a surface at non-positive depth or out of view."""


class InvalidParameter(ValidationError):
    """A configuration value is out of range or unknown."""


class UsageError(ValidationError):
    """Command-line flags are missing or inconsistent."""


# Format / IO family

class MissingInput(FormatError):
    """A referenced input path does not exist."""


class BadMagic(FormatError):
    """File sentinel or magic bytes do not match the format."""


class BadHeader(FormatError):
    """Malformed text header (PFM)."""


class TruncatedFile(FormatError):
    """The payload is shorter than the header announces."""


class DimensionOverflow(FormatError):
    """Header dimensions are outside the accepted range."""


class VersionMismatch(FormatError):
    """Unsupported binary format version."""
