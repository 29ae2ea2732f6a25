#!/usr/bin/env python3
"""
Main Interface - Torsion Calculator
Command line front end: run scripts, evaluate statements and verify the identity suite
"""

import sys
import argparse
import json
from typing import Dict, List, Any, Optional
import logging

from colorama import Fore, Style, init

from calc_config import CalcConfig, check_values
from errors import ParseError, SemanticError
from script import parse, run
from verify import ExprSpec, default_theories, run_suite, summary_records

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SCRIPT_ERROR = 1
EXIT_EVALUATION_ERROR = 2
EXIT_VERIFICATION_FAILED = 3


def setup_logging(level: str = "WARNING"):
    """Send log records to stderr so that query output stays exact"""
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )


class TorsionCalculator:
    """Main torscalc interface"""

    def __init__(self, config: Optional[CalcConfig] = None, out=None, err=None):
        self.config = config or CalcConfig()
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.color = bool(getattr(self.out, "isatty", lambda: False)())
        if self.color:
            init()

    def emit(self, text: str = ""):
        print(text, file=self.out)

    def run_command(self, command: str, args: Dict[str, Any] = None) -> int:
        """Run a command and return its exit code"""

        args = args or {}

        if command == "run":
            return self._cmd_run(args)
        elif command == "eval":
            return self._cmd_eval(args)
        elif command == "verify":
            return self._cmd_verify(args)
        elif command == "config":
            return self._cmd_config()
        else:
            print(f"❌ Unknown command: {command}", file=self.err)
            return EXIT_SCRIPT_ERROR

    def _execute(self, text: str) -> int:
        try:
            script = parse(text)
        except (ParseError, SemanticError) as e:
            print(f"❌ {type(e).__name__}: {e}", file=self.err)
            return EXIT_SCRIPT_ERROR

        result = run(script)
        for line in result.lines:
            self.emit(line)
        for message in result.errors:
            print(f"❌ {message}", file=self.err)
        return result.exit_code

    def _cmd_run(self, args: Dict[str, Any]) -> int:
        """Run a script file"""
        path = args["file"]
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            print(f"❌ Cannot read {path}: {e}", file=self.err)
            return EXIT_SCRIPT_ERROR
        logger.info(f"📜 Running {path}")
        return self._execute(text)

    def _cmd_eval(self, args: Dict[str, Any]) -> int:
        """Run statements given on the command line"""
        return self._execute(args["expression"])

    def _status_text(self, passed: bool) -> str:
        label = "PASS" if passed else "FAIL"
        if not self.color:
            return label
        return (Fore.GREEN if passed else Fore.RED) + label + Style.RESET_ALL

    def _cmd_verify(self, args: Dict[str, Any]) -> int:
        """Run the verification suite"""

        def option(key: str):
            value = args.get(key)
            return self.config.get(key) if value is None else value

        options = {key: option(key) for key in ("seed", "depth", "samples", "k", "theories")}
        invalid = [key for key, valid in check_values(options).items() if key in options and not valid]
        if invalid:
            for key in invalid:
                print(f"❌ Invalid value for --{key}: {options[key]}", file=self.err)
            return EXIT_SCRIPT_ERROR

        spec = ExprSpec(seed=options["seed"], max_depth=options["depth"])
        theories = default_theories(options["k"], options["theories"], spec.seed)
        reports = run_suite(spec, theories, options["samples"])

        if args.get("records"):
            for record in summary_records(reports):
                self.emit(json.dumps(record, sort_keys=True))
        else:
            for report in reports:
                self.emit(f"{self._status_text(report.passed)} {report.name} "
                          f"({report.samples} samples): {report.citation}")
                if not report.passed:
                    self.emit(f"    theory: {report.theory}")
                    self.emit(f"    lhs: {report.lhs}")
                    self.emit(f"    rhs: {report.rhs}")
                    for line in report.counterexample.splitlines():
                        self.emit(f"    {line}")
            failed = sum(1 for r in reports if not r.passed)
            self.emit(f"\n{len(reports) - failed}/{len(reports)} checks passed")

        return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFICATION_FAILED

    def _cmd_config(self) -> int:
        """Show the effective configuration"""
        self.emit(json.dumps(self.config.as_dict(), indent=2, sort_keys=True))
        validations = self.config.validate_configuration()
        for key, valid in validations.items():
            if not valid:
                print(f"⚠️ Invalid configuration value for {key}", file=self.err)
        return EXIT_OK if all(validations.values()) else EXIT_SCRIPT_ERROR


def create_parser():
    """Create command line argument parser"""

    parser = argparse.ArgumentParser(
        prog="torscalc",
        description="Torsion Calculator - exact higher torsion invariants of bundle expressions",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress to stderr")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Run command
    run_parser = subparsers.add_parser("run", help="Run a script file")
    run_parser.add_argument("file", help="Script file")

    # Eval command
    eval_parser = subparsers.add_parser("eval", help="Run statements from the command line")
    eval_parser.add_argument("-e", dest="expression", required=True, help="Statements separated by ';'")

    # Verify command
    verify_parser = subparsers.add_parser("verify", help="Run the identity suite")
    verify_parser.add_argument("--seed", type=int, help="Generator seed")
    verify_parser.add_argument("--depth", type=int, help="Maximum expression depth")
    verify_parser.add_argument("--samples", type=int, help="Generated expressions")
    verify_parser.add_argument("--k", type=int, nargs="+", help="Torsion degrees 4k")
    verify_parser.add_argument("--theories", type=int, help="Random custom theories per k")
    verify_parser.add_argument("--records", action="store_true", help="Print JSON summary records")

    # Config command
    subparsers.add_parser("config", help="Show the effective configuration")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""

    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_SCRIPT_ERROR

    calculator = TorsionCalculator()
    setup_logging("INFO" if args.verbose else calculator.config.get("log_level", "WARNING"))

    args_dict = vars(args).copy()
    del args_dict["command"]
    del args_dict["verbose"]

    try:
        return calculator.run_command(args.command, args_dict)
    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user", file=sys.stderr)
        return EXIT_SCRIPT_ERROR


if __name__ == "__main__":
    sys.exit(main())
