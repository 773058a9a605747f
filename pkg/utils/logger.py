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
import sys
import datetime

"""
This is the logging facility of the cost-volume engine. Every pipeline stage
reports through it, so that diagnostics always end up on the error stream
while standard output stays reserved for data (JSON reports, loss records).

It provides the following commonly used logging levels:

DEBUG:   Detailed information, typically of interest only when
         diagnosing problems (per-bin timings, shapes).
INFO:    Confirmation that a stage is working as expected.
WARNING: An indication that something unexpected happened, but that the
         stage can continue (e.g. pixels without any valid depth bin).
ERROR:   A more serious problem has occurred, and the stage will not be
         able to produce its output.
FATAL:   A serious error, indicating that the run must stop.

As well as the following non-standard levels:

PROGRESS: Sweep and pipeline progress (bin k/N, stage status).

Records below the current threshold are dropped; the threshold defaults to
INFO and can be set with ``set_level`` or the ``DSCV_LOG_LEVEL`` environment
variable (a level name such as ``DEBUG``).
"""  # pylint: disable=pointless-string-statement


CRITICAL = 50
FATAL = CRITICAL
ERROR = 40
WARNING = 30
WARN = WARNING
PROGRESS = 21
INFO = 20
DEBUG = 10

_levelNames = {  # pylint: disable=invalid-name
    FATAL: 'FATAL',
    ERROR: 'ERROR',
    WARNING: 'WARNING',
    PROGRESS: 'PROGRESS',
    INFO: 'INFO',
    DEBUG: 'DEBUG',
    WARN: 'WARNING',
    CRITICAL: 'FATAL'
}

_levelValues = {name: value for value, name in _levelNames.items()}  # pylint: disable=invalid-name

_threshold = _levelValues.get(  # pylint: disable=invalid-name
    os.environ.get("DSCV_LOG_LEVEL", "INFO").upper(), INFO)


def set_level(level):
    """
    Set the minimum level that is written out.

    Parameters
    ----------
    level : int or str
        numeric level (e.g. ``logger.DEBUG``) or its name.

    Returns
    -------
    int
        the previous threshold, so callers can restore it.

    Raises
    ------
    ValueError
        if a name is not one of the levels above; the threshold is kept.
    """
    global _threshold  # pylint: disable=global-statement,invalid-name
    previous = _threshold
    if isinstance(level, str):
        if level.upper() not in _levelValues:
            raise ValueError("unknown log level {!r}, expected one of {}".format(
                level, ", ".join(sorted(set(_levelValues)))))
        level = _levelValues[level.upper()]
    _threshold = level
    return previous


def __log(level, message, *args, **kwargs):
    """
    Function to print out the logging input
    """
    if level not in _levelNames:
        level = INFO
    if level < _threshold:
        return False
    log_time = datetime.datetime.now()
    log_ts = "{}-{:02d}-{:02d} {:02d}:{:02d}:{:02d}".format(
        log_time.year, log_time.month, log_time.day,
        log_time.hour, log_time.minute, log_time.second)
    if args or kwargs:
        message = message.format(*args, **kwargs)
    sys.stderr.write("{} | {}: {}\n".format(log_ts, _levelNames[level], message))
    return True


def debug(message, *args, **kwargs):
    """
    Logs a message with level DEBUG.

    'message' is the message format string, and the args are the arguments
    which are merged into msg using ``str.format``.
    """
    return __log(DEBUG, message, *args, **kwargs)


def info(message, *args, **kwargs):
    """
    Logs a message with level INFO. The arguments are interpreted as for
    debug().
    """
    return __log(INFO, message, *args, **kwargs)


def warn(message, *args, **kwargs):
    """
    Logs a message with level WARNING. The arguments are interpreted as for
    debug().
    """
    return __log(WARNING, message, *args, **kwargs)


warning = warn  # pylint: disable=invalid-name


def error(message, *args, **kwargs):
    """
    Logs a message with level ERROR. The arguments are interpreted as for
    debug().
    """
    return __log(ERROR, message, *args, **kwargs)


def fatal(message, *args, **kwargs):
    """
    Logs a message with level FATAL. The arguments are interpreted as for
    debug().
    """
    return __log(FATAL, message, *args, **kwargs)


critical = fatal  # pylint: disable=invalid-name


def progress(message, *args, **kwargs):
    """
    Provides information about sweep or pipeline progress.

    Logs a message with level ``PROGRESS``. Two pre-baked formats can be
    activated through ``**kwargs``:

    Parameters
    ----------
    status : str
        Status of the stage
        logs "MESSAGE - STATUS"

    task_id : int
        Current item (e.g. depth bin); requires also the "total" item
        logs "MESSAGE (TASK_ID/TOTAL)"

    total : int
        Total number of items, used in conjunction with task_id

    Example
    -------

    .. code-block:: python
       :linenos:

       logger.progress("static sweep", status="RUNNING")
       for k in range(n_bins):
           sweep_bin(k)
           logger.progress("static sweep", task_id=k + 1, total=n_bins)
       logger.progress("static sweep", status="DONE")
    """

    if "status" in kwargs:
        return __log(PROGRESS, "{} - {}", message, kwargs["status"])

    if "task_id" in kwargs:
        return __log(PROGRESS, "{} ({}/{})", message, kwargs["task_id"], kwargs["total"])

    return __log(PROGRESS, message, *args, **kwargs)
