import sys
from abc import ABC, abstractmethod

from loguru import logger

from src.wpdiff.domain import events


class AbstractNotifications(ABC):
    """
    AbstractNotifications is an abstract base class for all notifications.

    Methods:
        - send(self, destination: str, event: events.Event) -> None: Send a notification.
    """

    @abstractmethod
    def send(self, destination: str, event: events.Event) -> None:
        raise NotImplementedError


class CliNotifications(AbstractNotifications):
    """
    CliNotifications writes events to the diagnostic stream, keeping stdout
    free for data.
    """

    def send(self, destination: str, event: events.Event) -> None:
        """
        Send a notification.

        Args:
            destination: str: run id the event belongs to.
            event: events.Event: The event to send.
        """
        print(event.to_message(), file=sys.stderr)


class LogNotifications(AbstractNotifications):
    def send(self, destination: str, event: events.Event) -> None:
        if isinstance(event, events.RunFailed):
            logger.error(f"[{destination}] {event.to_message()}")
        else:
            logger.info(f"[{destination}] {event.to_message()}")
