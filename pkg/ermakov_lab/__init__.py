__author__ = "Andy Babic"
__author_email__ = "andyjbabic@gmail.com"
__copyright__ = "Copyright 2026 Andy Babic"
__version__ = "0.1.0"


def get_version():
    return __version__
