"""Opt-in admissibility checking inside hot flux kernels.

Off by default: the kernels assume admissible inputs and the per-call check
costs real time at these call counts. Enable while hunting a crash.
"""

enabled = False


def enable_checks():
    global enabled
    enabled = True


def disable_checks():
    global enabled
    enabled = False
