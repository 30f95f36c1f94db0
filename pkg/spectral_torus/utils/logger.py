import functools
import logging

PACKAGE_LOGGER = "spectral_torus"
_FORMAT = "%(asctime)s.%(msecs)03d %(levelname)s %(module)s - %(funcName)s: %(message)s"


@functools.cache
def _configured_level() -> str:
    # config does not log, so importing it here cannot recurse
    from spectral_torus.config import config

    return config.Config().log_level


def setup_logger(name: str, level: int | str | None = None) -> logging.Logger:
    """Module logger. The first call installs the stream handler; without an
    explicit level it uses the `SPECTRAL_TORUS_LOG_LEVEL` setting."""
    logging.basicConfig(
        level=level if level is not None else _configured_level(),
        handlers=[logging.StreamHandler()],
        format=_FORMAT,
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    return logging.getLogger(name)


def set_level(level: int | str) -> None:
    """Applies a level to every spectral_torus logger, e.g. for `--verbose`."""
    logging.getLogger(PACKAGE_LOGGER).setLevel(level)
