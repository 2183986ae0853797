# -*- coding: utf-8 -*-
"""Community Explore - budget allocation and online learning for community exploration"""

__version__ = "0.1.0"
__description__ = "Offline and adaptive exploration optimizers, collision estimators and CLCB regret experiments"
