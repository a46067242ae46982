"""Logging configuration with round-trip float formatting"""
import logging


class RoundTripFormatter(logging.Formatter):
    """Formatter that renders float arguments with repr so no digits are lost"""

    def format(self, record: logging.LogRecord) -> str:
        original_args = record.args
        if original_args and isinstance(original_args, tuple):
            record.args = tuple(
                repr(arg) if isinstance(arg, float) else arg
                for arg in original_args
            )
            try:
                return super().format(record)
            except TypeError:
                # message uses numeric conversions such as %.3f
                record.args = original_args
        return super().format(record)


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging for the toolkit"""

    formatter = RoundTripFormatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level.upper()))

    # Remove existing handlers
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    root_logger.addHandler(handler)
