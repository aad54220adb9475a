"""CLI Commands Package"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_PATCH = 2
EXIT_OVERFITTING = 3
