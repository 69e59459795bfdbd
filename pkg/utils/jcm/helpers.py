from functools import lru_cache, wraps

from rich.console import Console

_verbose_override = None
_debug_console = Console(stderr=True)


@lru_cache(maxsize=1)
def load_configuration():
    """Load the default configuration once; None if it cannot be read"""
    from utils.jcm.config_manager import ConfigManager
    try:
        return ConfigManager()
    except (FileNotFoundError, ValueError) as e:
        _debug_console.print(f"[red]Error loading configuration: {e}[/red]")
        return None


def set_verbose(enabled: bool) -> None:
    """Force debug output on or off regardless of the config file"""
    global _verbose_override
    _verbose_override = enabled


def is_verbose() -> bool:
    if _verbose_override is not None:
        return _verbose_override
    config = load_configuration()
    return bool(config and config.is_debug_mode())


def debug_only(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        if is_verbose():
            return func(*args, **kwargs)
    return wrapper


@debug_only
def debug_print(*args, **kwargs):
    _debug_console.print(*args, **kwargs)
