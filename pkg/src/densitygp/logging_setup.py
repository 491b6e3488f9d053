"""Console logging with colorlog."""

import logging

import colorlog

LOG_FORMAT = '%(log_color)s%(asctime)s [%(levelname)s]%(reset)s %(message)s'


def setup_logging(level: str = 'INFO') -> logging.Logger:
    """Configure the root logger once; repeated calls only change the level."""
    root = logging.getLogger()
    if not any(getattr(h, '_densitygp', False) for h in root.handlers):
        handler = colorlog.StreamHandler()
        handler.setFormatter(colorlog.ColoredFormatter(
            LOG_FORMAT,
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'red,bg_white',
            },
        ))
        handler._densitygp = True
        root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    return root
