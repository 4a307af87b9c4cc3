from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union
import json
import pandas as pd

from app.config_settings import settings
from logger_config import logger


FLOAT_FORMAT = "%.17g"
SUPPORTED_FORMATS = ("csv", "parquet")


# --- Helpers

def plot_script(name: str, csv_files: Iterable[str]) -> str:
    """Matplotlib script text that reads only the given CSVs (first column on the x-axis)."""
    files = sorted(csv_files)
    lines = [
        f'"""Plots for the {name} results; reads only the CSV files next to it."""',
        "from pathlib import Path",
        "",
        "import matplotlib.pyplot as plt",
        "import pandas as pd",
        "",
        "HERE = Path(__file__).parent",
        f"FILES = {files!r}",
        "",
        "",
        "def main():",
        "    for file_name in FILES:",
        "        frame = pd.read_csv(HERE / file_name)",
        "        if frame.shape[1] < 2 or frame.empty:",
        "            continue",
        "        x = frame.columns[0]",
        "        fig, ax = plt.subplots()",
        "        for column in frame.columns[1:]:",
        "            ax.plot(frame[x], frame[column], label=column)",
        "        ax.set_xlabel(x)",
        "        ax.set_title(file_name)",
        "        ax.legend()",
        "        fig.savefig(HERE / file_name.replace('.csv', '.png'), dpi=150)",
        "        plt.close(fig)",
        "",
        "",
        'if __name__ == "__main__":',
        "    main()",
        "",
    ]
    return "\n".join(lines)


def _verify_csv(path: Path, frame: pd.DataFrame) -> None:
    """Read a written CSV back and compare it with the frame."""
    if frame.empty:
        back = pd.read_csv(path, float_precision="round_trip")
        if list(back.columns) != [str(c) for c in frame.columns]:
            raise IOError(f"header mismatch after writing {path}")
        return
    back = pd.read_csv(path, float_precision="round_trip")
    try:
        pd.testing.assert_frame_equal(
            back.reset_index(drop=True), frame.reset_index(drop=True), check_dtype=False, check_exact=True,
        )
    except AssertionError as e:
        raise IOError(f"read-back of {path} differs from the written data: {str(e)}") from e


# --- Writer

def write_table(frame: pd.DataFrame, path: Union[str, Path], file_type: str = "csv", verify: bool = True) -> Path:
    """
    Write one DataFrame as CSV or parquet.

    Args:
        frame: table to write
        path: target file without suffix
        file_type: 'csv' or 'parquet'
        verify: read CSVs back and compare

    Returns:
        Path of the written file
    """
    target = Path(path).with_suffix(f".{file_type}")
    try:
        if file_type == "csv":
            frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
            if verify:
                _verify_csv(target, frame)
        elif file_type == "parquet":
            frame.to_parquet(target, index=False, engine="pyarrow", compression="snappy")
        else:
            raise ValueError(f"Unsupported file type: {file_type}")
        logger.debug(f"Wrote {target} ({len(frame)} rows)")
        return target
    except Exception as e:
        logger.error(f"Error writing {file_type} data to {target}: {str(e)}")
        raise


def write_outputs(results: Dict[str, pd.DataFrame], out_dir: Union[str, Path, None] = None,
                  formats: Optional[List[str]] = None, summary: Optional[Dict[str, Any]] = None,
                  name: str = "results", plot: bool = True) -> List[Path]:
    """
    Write every result table, the JSON summary and an optional plot script.

    Args:
        results: table name -> DataFrame; column order is kept as given
        out_dir: output directory (settings.OUTPUT_DIR when None)
        formats: subset of 'csv', 'parquet' (settings.OUTPUT_FORMATS when None)
        summary: JSON-serializable scenario summary written as summary.json
        name: scenario name used for the plot script
        plot: emit plot_<name>.py

    Returns:
        written paths in a deterministic order
    """
    directory = Path(out_dir or settings.OUTPUT_DIR)
    formats = formats or settings.output_formats
    unknown = [fmt for fmt in formats if fmt not in SUPPORTED_FORMATS]
    if unknown:
        raise ValueError(f"Unsupported output format(s): {', '.join(unknown)}")
    # CSV is always written; the plot script depends on it
    formats = ["csv"] + [fmt for fmt in formats if fmt != "csv"]

    directory.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for table, frame in sorted(results.items()):
        for fmt in formats:
            written.append(write_table(frame, directory / table, fmt))

    if summary is not None:
        summary_path = directory / "summary.json"
        summary_path.write_text(json.dumps(summary, indent=2, default=str), encoding="utf-8")
        written.append(summary_path)

    if plot and results:
        script_path = directory / f"plot_{name}.py"
        script_path.write_text(plot_script(name, [f"{table}.csv" for table in results]), encoding="utf-8")
        written.append(script_path)

    logger.info(f"Wrote {len(written)} file(s) to {directory}")
    return written


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV or parquet result back."""
    path = Path(path)
    if path.suffix == ".parquet":
        return pd.read_parquet(path, engine="pyarrow")
    return pd.read_csv(path, float_precision="round_trip")
