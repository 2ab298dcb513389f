from time import time
from functools import wraps
from typing import Callable, TypeVar

R = TypeVar("R")


def profile_command(name: str) -> Callable[[Callable[..., R]], Callable[..., R]]:
    """Prints the wall time of a command. Timings go to the console only and
    never into result files."""

    def decorator(command: Callable[..., R]) -> Callable[..., R]:
        @wraps(command)
        def wrapper(*args, **kwargs) -> R:
            start_time: float = time()
            result = command(*args, **kwargs)
            print(f"[{name}] finished in {time() - start_time:.2f}s")
            return result

        return wrapper

    return decorator
