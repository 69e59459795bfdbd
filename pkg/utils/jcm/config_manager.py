"""
ConfigManager - configuration for the driven JCM engine
Handles loading, validation and inspection of the JSON defaults
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

CONFIG_ENV_VAR = "JCM_CONFIG"

REQUIRED_SECTIONS = [
    "truncation", "oracle", "sweep", "output", "tolerances", "reference_defaults", "debug"
]


class ConfigManager:
    """
    Configuration management for the JCM engine
    Loads the JSON defaults, validates them and serves values by dot path
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize ConfigManager with automatic config loading

        Args:
            config_path: Optional path to config file. Falls back to $JCM_CONFIG
                (a .env file is honored), then to the packaged defaults.
        """
        self.console = Console(stderr=True)
        self.config_path = config_path or self._get_default_config_path()
        self.config = self._load_and_validate_config()

    def _get_default_config_path(self) -> str:
        """Environment override first, then jcm_config.json next to this module"""
        load_dotenv()
        override = os.getenv(CONFIG_ENV_VAR)
        if override:
            return override
        return str(Path(__file__).parent / "jcm_config.json")

    def _load_and_validate_config(self) -> Dict[str, Any]:
        """
        Load configuration file and check its sections

        Raises:
            FileNotFoundError: If config file doesn't exist
            ValueError: If config file is invalid JSON or missing required sections
        """
        if not os.path.exists(self.config_path):
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                config = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in config file: {e}")

        missing_sections = [section for section in REQUIRED_SECTIONS if section not in config]
        if missing_sections:
            raise ValueError(f"Missing required config sections: {missing_sections}")

        return config

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Args:
            key_path: Dot-separated path (e.g. "oracle.max_step_product")
            default: Value returned when the key is absent
        """
        value = self.config
        try:
            for key in key_path.split('.'):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def update(self, key_path: str, value: Any) -> None:
        """Set a configuration value using dot notation, creating sections as needed"""
        keys = key_path.split('.')
        config = self.config
        for key in keys[:-1]:
            if key not in config:
                config[key] = {}
            config = config[key]
        config[keys[-1]] = value

    def truncation_policy(self):
        """TruncationPolicy built from the truncation section"""
        from utils.jcm.model import TruncationPolicy
        return TruncationPolicy(
            epsilon=float(self.get("truncation.epsilon", 1e-12)),
            max_terms=int(self.get("truncation.max_terms", 4096)),
        )

    def oracle_settings(self):
        """OracleSettings built from the oracle section"""
        from utils.jcm.oracle import OracleSettings
        section = self.config.get("oracle", {})
        known = OracleSettings.__dataclass_fields__.keys()
        return OracleSettings(**{key: value for key, value in section.items() if key in known})

    def is_debug_mode(self) -> bool:
        return bool(self.get("debug.verbose_logging", False))

    def test_config(self) -> bool:
        """
        Configuration check with rich console output

        Returns:
            True if every checked value is valid
        """
        self.console.print("\n[bold blue]🔧 JCM CONFIGURATION TEST[/bold blue]")
        self.console.print("=" * 60)
        self.console.print(f"[yellow]📁 Config file:[/yellow] {self.config_path}")

        self._display_config_sections()
        all_passed = self._validate_config_values()

        status = "[green]✅ PASSED[/green]" if all_passed else "[red]❌ FAILED[/red]"
        self.console.print(f"\n[bold]🎯 Configuration Test Result: {status}[/bold]")
        return all_passed

    def _display_config_sections(self) -> None:
        table = Table(title="📋 JCM Settings", show_header=True, header_style="bold magenta")
        table.add_column("Section", style="cyan", width=18)
        table.add_column("Values", style="white", overflow="fold")

        for section in REQUIRED_SECTIONS:
            values = self.config.get(section, {})
            table.add_row(section, "  ".join(f"{key}={values[key]}" for key in values))

        self.console.print(table)

    def _validate_config_values(self) -> bool:
        self.console.print("\n[yellow]🔍 Validating Configuration Values[/yellow]")

        positive = lambda x: isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0
        non_negative = lambda x: isinstance(x, (int, float)) and not isinstance(x, bool) and x >= 0
        unit_interval = lambda x: positive(x) and x < 1
        validation_tests = [
            ("truncation.epsilon", unit_interval, "Must be float in (0, 1)"),
            ("truncation.max_terms", lambda x: isinstance(x, int) and x >= 16, "Must be integer >= 16"),
            ("oracle.method", lambda x: x in ("transformed", "lab"), "Must be transformed or lab"),
            ("oracle.trajectory_epsilon", unit_interval, "Must be float in (0, 1)"),
            ("oracle.leakage_threshold", unit_interval, "Must be float in (0, 1)"),
            ("oracle.norm_drift_threshold", unit_interval, "Must be float in (0, 1)"),
            ("oracle.max_step_product", positive, "Must be positive number"),
            ("oracle.time_average_window_g", positive, "Must be positive number"),
            ("oracle.time_average_samples", lambda x: isinstance(x, int) and x >= 1000, "Must be integer >= 1000"),
            ("sweep.max_workers", lambda x: isinstance(x, int) and x > 0, "Must be positive integer"),
            ("sweep.parallel", lambda x: isinstance(x, bool), "Must be boolean"),
            ("output.format", lambda x: x in ("csv", "json"), "Must be csv or json"),
            ("tolerances.inversion", positive, "Must be positive number"),
            ("tolerances.time_average", positive, "Must be positive number"),
            ("reference_defaults.omega_c", positive, "Must be positive number"),
            ("reference_defaults.omega_eg", positive, "Must be positive number"),
            ("reference_defaults.g", non_negative, "Must be number >= 0"),
            ("debug.verbose_logging", lambda x: isinstance(x, bool), "Must be boolean"),
        ]

        all_valid = True
        for key_path, validator, error_msg in validation_tests:
            value = self.get(key_path)
            if value is None:
                self.console.print(f"  [red]❌[/red] {key_path}: [red]MISSING[/red]")
                all_valid = False
                continue

            is_valid = validator(value)
            status = "[green]✅[/green]" if is_valid else "[red]❌[/red]"
            self.console.print(f"  {status} {key_path}: {value}")
            if not is_valid:
                self.console.print(f"    [red]Error: {error_msg}[/red]")
                all_valid = False

        return all_valid
