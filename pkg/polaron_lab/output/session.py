import logging
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Sequence

from polaron_lab.output.writers import write_csv, write_json, write_line_plot

logger = logging.getLogger(__name__)


class RunSession:
    """Output directory of one CLI run: timestamps, stage runtimes and the config echo for every file."""

    def __init__(self, output_dir: Path, command: str, config_source: str = ""):
        self.output_dir = Path(output_dir)
        self.command = command
        self.config_source = config_source
        self.generated = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.runtimes: Dict[str, float] = {}
        self.files: List[Path] = []
        self._started = time.perf_counter()

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.runtimes[name] = self.runtimes.get(name, 0.0) + time.perf_counter() - start

    def header(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "generated": self.generated,
            "runtimes": dict(self.runtimes),
            "total_runtime": time.perf_counter() - self._started,
        }

    def csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = write_csv(self.output_dir / name, columns, rows, self.config_source, self.generated)
        self.files.append(path)
        return path

    def json(self, name: str, payload: Dict[str, Any]) -> Path:
        body = dict(payload)
        body.setdefault("config_source", self.config_source)
        path = write_json(self.output_dir / name, body, self.header())
        self.files.append(path)
        return path

    def plot(self, name: str, x, series, xlabel: str, ylabel: str, title: str = "", markers: bool = False) -> Path:
        path = write_line_plot(self.output_dir / name, x, series, xlabel, ylabel, title, markers)
        self.files.append(path)
        return path


@contextmanager
def open_session(output_dir: Path, command: str, config_source: str = "") -> Iterator[RunSession]:
    session = RunSession(output_dir, command, config_source)
    session.output_dir.mkdir(parents=True, exist_ok=True)
    try:
        yield session
    except Exception as exc:
        logger.error(f"{command} failed after writing {len(session.files)} files: {exc}")
        raise
    finally:
        logger.info(f"{command}: {len(session.files)} files in {session.output_dir}")

