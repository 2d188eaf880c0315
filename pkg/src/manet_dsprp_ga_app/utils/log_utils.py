# -*- coding: utf-8 -*-
# ---------------------------------------------------------
# @File             : log_utils.py
# Time rotated file logging configured from the `logs` section of the props.
# ---------------------------------------------------------

import logging
import time
from datetime import datetime, timezone
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import Any, Dict, Optional

from manet_dsprp_ga_app.utils.property_utils import property_validation

PACKAGE_LOGGER = "manet_dsprp_ga_app"
DEFAULT_MESSAGE_FORMAT = "[%(asctime)s GMT] %(levelname)s::%(funcName)s() %(message)s"


class LogUtils:
    def get_time_rotated_log(
        self, props: Optional[Dict[str, Any]] = None, level: str = "INFO"
    ) -> logging.Logger:
        """
        Configure and return the package logger.

        Writes to `<app.logs_dir>/<strftime(logs.prefix)>_<logs.suffix>`, rotated at
        midnight, and mirrors records to stderr. Calling it again replaces the
        handlers instead of stacking them.
        """
        props = props or {}
        logs_dir = property_validation(props, "app.logs_dir", str, default="logs")
        prefix = property_validation(props, "logs.prefix", str, default="%Y%m%d")
        suffix = property_validation(props, "logs.suffix", str, default="manet_dsprp_ga_app.log")
        message_format = property_validation(
            props, "logs.message_format", str, default=DEFAULT_MESSAGE_FORMAT
        )

        Path(logs_dir).mkdir(parents=True, exist_ok=True)
        stamp = datetime.now(timezone.utc).strftime(prefix)
        log_file = Path(logs_dir) / f"{stamp}_{suffix}"

        formatter = logging.Formatter(message_format)
        formatter.converter = time.gmtime

        file_handler = TimedRotatingFileHandler(
            log_file, when="midnight", backupCount=14, encoding="utf-8", utc=True
        )
        file_handler.setFormatter(formatter)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)

        log = logging.getLogger(PACKAGE_LOGGER)
        for handler in list(log.handlers):
            log.removeHandler(handler)
            handler.close()
        log.addHandler(file_handler)
        log.addHandler(console_handler)
        log.setLevel(level.upper())
        log.propagate = False
        return log
