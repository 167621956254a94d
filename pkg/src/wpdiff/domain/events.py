from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from pydantic import BaseModel


class Event(BaseModel, ABC):
    @abstractmethod
    def to_event_string(self) -> str:
        pass

    @abstractmethod
    def to_message(self) -> str:
        pass

    @abstractmethod
    def to_markdown(self) -> str:
        pass

    def __str__(self):
        return f"run_id: {self.run_id}"


class RunCompleted(Event):
    run_id: str
    name: str
    out_dir: str
    files: List[str]
    wall_clock: float
    peak_count: Optional[int] = None
    summary: Dict[str, str] = {}

    def to_event_string(self) -> str:
        return f"data: {self.to_markdown()}"

    def to_message(self) -> str:
        message = f"{self.name} finished in {self.wall_clock:.2f}s -> {self.out_dir}"
        if self.peak_count is not None:
            message += f"\npeaks.count={self.peak_count}"
        for key, value in self.summary.items():
            message += f"\n{key}={value}"
        return message

    def to_markdown(self) -> str:
        markdown = f"## Run Completed\n\n**{self.name}** in {self.wall_clock:.2f}s\n\n"
        for path in self.files:
            markdown += f"- {path}\n"
        return markdown.strip()


class RunFailed(Event):
    run_id: str
    name: str
    exception: str
    exit_code: int

    def to_event_string(self) -> str:
        return f"data: {self.to_markdown()}"

    def to_message(self) -> str:
        return f"{self.name} failed (exit {self.exit_code}): {self.exception}"

    def to_markdown(self) -> str:
        return f"## Failed Run\n\n```\n{self.exception}\n```"


class SweepCompleted(Event):
    run_id: str
    name: str
    out_dir: str
    points: List[str]
    wall_clock: float

    def to_event_string(self) -> str:
        return f"event: {self.to_message()}"

    def to_message(self) -> str:
        return (
            f"sweep {self.name}: {len(self.points)} points in {self.wall_clock:.2f}s -> {self.out_dir}"
        )

    def to_markdown(self) -> str:
        points = "\n".join(f"- {p}" for p in self.points)
        return f"## Sweep Completed\n\n{self.name}\n\n{points}"
