#!/usr/bin/env python3
# lib/__init__.py - Package initialization
