"""Shared failure type for runtime checks of proved identities."""


class IdentityViolation(AssertionError):
    """A proven identity or inequality failed numerically; indicates a bug."""


def ensure(condition: bool, message: str) -> None:
    if not condition:
        raise IdentityViolation(message)
