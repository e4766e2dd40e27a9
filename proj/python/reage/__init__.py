# Copyright (C) 2026 The reage Authors
# SPDX-License-Identifier: Apache-2.0
"""Re-aging core: schedules, inversion, angular and attention-controlled editing, evaluation."""

from ._reage import *  # noqa: F401,F403
from ._reage import __doc__  # noqa: F401

__version__ = "0.1.0"
