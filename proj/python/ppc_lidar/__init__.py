# Copyright 2026 The ppc-lidar Authors
# SPDX-License-Identifier: Apache-2.0
"""Probabilistic point clouds from simulated single-photon LiDAR histograms."""

from ._ppc import *  # noqa: F401,F403
from ._ppc import __version__  # noqa: F401
