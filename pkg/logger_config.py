import logging
import sys

from app.config_settings import settings


# Set up logger
logger = logging.getLogger("app")
logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

# Silence verbose plotting / numexpr logging
logging.getLogger("matplotlib").setLevel(logging.WARNING)
logging.getLogger("numexpr").setLevel(logging.WARNING)

formatter = logging.Formatter(
    '[%(levelname)s] [%(asctime)s] | %(name)s.%(module)s.%(funcName)s - %(message)s'
    )

# Console handler for logging to stdout
if not logger.handlers:
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # File handler only when a log file is configured
    if settings.LOG_FILE:
        file_handler = logging.FileHandler(settings.LOG_FILE)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
