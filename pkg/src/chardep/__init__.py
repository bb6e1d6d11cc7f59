# -*- coding: utf-8 -*-
"""Toolkit for character-level word-internal dependency structure."""

__version__ = "0.1.0"
