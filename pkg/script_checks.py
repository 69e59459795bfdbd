"""
Script-mode runner for the root test files
Every test_*.py also runs as `python test_x.py` and reports through rich panels.
"""
import time
import traceback
from typing import Callable, Dict, List, Tuple

from rich.console import Console
from rich.panel import Panel


def collect_tests(namespace: Dict[str, object]) -> List[Tuple[str, Callable]]:
    """test_* functions of a module namespace, in definition order"""
    return [(name, func) for name, func in namespace.items()
            if name.startswith("test_") and callable(func)]


def run_all_tests(title: str, namespace: Dict[str, object]) -> bool:
    """Run every test function, print a summary panel, return overall success"""
    console = Console()
    tests = collect_tests(namespace)
    console.print(Panel(f"[bold cyan]🧪 {title}[/bold cyan]\n\n{len(tests)} checks",
                        title="🔬 Validation", border_style="cyan"))

    results = []
    for test_name, test_func in tests:
        start = time.time()
        try:
            test_func()
            console.print(f"  [green]✅ {test_name}[/green] ({time.time() - start:.2f}s)")
            results.append((test_name, True))
        except Exception as e:
            console.print(f"  [red]❌ {test_name}: {type(e).__name__}: {e}[/red]")
            console.print(f"[dim]{traceback.format_exc()}[/dim]")
            results.append((test_name, False))

    passed = len([r for r in results if r[1]])
    total = len(results)
    if passed == total:
        console.print(Panel(f"[bold green]🎉 ALL TESTS PASSED ({passed}/{total})[/bold green]",
                            title="🚀 Validation Complete", border_style="green"))
    else:
        failed_tests = [name for name, ok in results if not ok]
        console.print(Panel(f"[bold red]❌ SOME TESTS FAILED ({passed}/{total} passed)[/bold red]\n\n"
                            f"Failed tests: {', '.join(failed_tests)}",
                            title="⚠️ Validation Issues", border_style="red"))
    return passed == total
