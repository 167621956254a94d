from typing import Callable, Dict, List, Type, Union

from loguru import logger

from src.wpdiff.adapters.exporter import AbstractExporter
from src.wpdiff.domain import commands, events

Message = Union[commands.Command, events.Event]


def describe(command: commands.Command) -> str:
    """Short run description for log lines: preset name, run mode or compared files."""
    if isinstance(command, commands.RunPreset):
        return f"preset {command.name}"
    if isinstance(command, commands.Compare):
        return f"compare {command.path_a} vs {command.path_b}"
    if isinstance(command, commands.Sweep):
        axes = ", ".join(f"{key}[{len(values)}]" for key, values in command.axes.items())
        return f"sweep {command.config.run.mode} over {axes}"
    return f"{type(command).__name__.lower()} {command.config.run.mode}"


class MessageBus:
    """
    Routes run commands to their handler and the resulting run events to
    the notifications.

    A command is one run (simulate, analytic, experiment, preset, compare or
    sweep). Its handler writes the output through the exporter and records a
    RunCompleted or SweepCompleted event there; the bus drains those events
    after the handler returns. Main publishes RunFailed directly.

    Args:
        exporter: AbstractExporter: holds the events recorded by the handlers.
        event_handlers: Dict[Type[events.Event], List[Callable]]: notification handlers per event type.
        command_handlers: Dict[Type[commands.Command], Callable]: one run handler per command type.
    """

    def __init__(
        self,
        exporter: AbstractExporter,
        event_handlers: Dict[Type[events.Event], List[Callable]],
        command_handlers: Dict[Type[commands.Command], Callable],
        notifications=None,
    ) -> None:
        self.exporter = exporter
        self.event_handlers = event_handlers
        self.command_handlers = command_handlers
        self.notifications = notifications

    def handle(self, message: Message) -> None:
        self.queue = [message]
        while self.queue:
            message = self.queue.pop(0)
            if isinstance(message, events.Event):
                self.handle_event(message)
            elif isinstance(message, commands.Command):
                self.handle_command(message)
            else:
                raise TypeError(f"{message!r} is neither a run command nor a run event")

    def handle_command(self, command: commands.Command) -> None:
        """
        Runs the handler for one command. Any error ends the run and is
        re-raised so the CLI can map it to an exit code.
        """
        handler = self.command_handlers.get(type(command))
        if handler is None:
            raise KeyError(f"no run handler for {type(command).__name__}")

        run = describe(command)
        logger.info(f"run {command.run_id}: {run}")
        try:
            handler(command)
        except Exception:
            logger.exception(f"run {command.run_id} aborted: {run}")
            raise
        self.queue.extend(self.exporter.collect_new_events())

    def handle_event(self, event: events.Event) -> None:
        """
        Passes a run event to every notification handler. A failing
        notification is logged and skipped; the run output is already on disk.
        """
        handlers = self.event_handlers.get(type(event), [])
        if not handlers:
            logger.debug(f"no notification handler for {type(event).__name__}")
        for handler in handlers:
            try:
                logger.debug(f"notifying {type(event).__name__} for run {event.run_id}")
                handler(event)
                self.queue.extend(self.exporter.collect_new_events())
            except Exception:
                logger.exception(f"notification for run {event.run_id} failed ({type(event).__name__})")
                continue
