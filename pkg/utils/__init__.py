#!/usr/bin/env python3
# utils/__init__.py - Package initialization
