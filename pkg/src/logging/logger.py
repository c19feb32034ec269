import logging
import os
from datetime import datetime

from src.util.config import Config

LOGGER_NAME = 'fuselab'

def setup_logger(log_dir=None):
    logger = logging.getLogger(LOGGER_NAME)
    if logger.handlers:
        return logger

    log_dir = log_dir or Config.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    log_filename = os.path.join(log_dir, f'fuselab_log_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log')

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    for handler in (logging.FileHandler(log_filename), logging.StreamHandler()):
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    logger.setLevel(logging.INFO)
    logger.propagate = False
    return logger

def get_logger():
    """Library-side access to the fuselab logger; never attaches handlers."""
    return logging.getLogger(LOGGER_NAME)
