import logging


def setup_logging(level=logging.INFO, logfile=None, force=False):
    """Log to stderr and, when ``logfile`` is given, to that file as well.

    ``force`` replaces handlers installed by an earlier call, so a CLI run can
    redirect the log into its output directory.
    """
    handlers = [logging.StreamHandler()]
    if logfile is not None:
        handlers.append(logging.FileHandler(logfile))
    logging.basicConfig(
        level=level,
        format='%(levelname)s - %(message)s',
        handlers=handlers,
        force=force
    )
