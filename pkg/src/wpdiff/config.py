from os import getenv
from pathlib import Path

ROOTDIR: str = str(Path(__file__).resolve().parents[2])


def get_logging_config():
    logging_level = getenv("logging_level", "info")
    logging_format = getenv("logging_format", "text")

    return dict(logging_level=logging_level, logging_format=logging_format)


def get_runtime_config():
    threads = getenv("WPDIFF_THREADS", "1")
    nk = getenv("WPDIFF_NK", "64")

    try:
        threads = int(threads)
    except ValueError:
        raise ValueError("WPDIFF_THREADS must be an integer")

    if threads < 1:
        raise ValueError("WPDIFF_THREADS must be at least 1")

    try:
        nk = int(nk)
    except ValueError:
        raise ValueError("WPDIFF_NK must be an integer")

    if nk < 64:
        raise ValueError("WPDIFF_NK must be at least 64")

    return dict(threads=threads, nk=nk)


def get_output_config():
    output_dir = getenv("WPDIFF_OUTPUT_DIR", "out")
    report_template_path = getenv(
        "WPDIFF_REPORT_TEMPLATES", f"{ROOTDIR}/src/wpdiff/templates/report_templates.yaml"
    )

    return dict(output_dir=Path(output_dir), report_template_path=report_template_path)
