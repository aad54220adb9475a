"""Utilities Package"""