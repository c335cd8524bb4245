#!/usr/bin/env python3
"""
User Flow Test Suite
Runs each end-to-end flow (pipeline run, CLI, variant comparison) and reports
one line per flow. Pass --slow to include the planted-signal acceptance run.
"""

import sys
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import unittest

from test.userflowtesting import test_acceptance, test_cli, test_compare_flow, test_pipeline_run


class UserFlowTestSuite:
    """Test suite for validating the pipeline's user flows."""

    def __init__(self, include_slow: bool = False):
        self.include_slow = include_slow
        self.test_results = []

    def run_all_tests(self):
        """Run all user flow tests and return results."""
        print("=== Running User Flow Test Suite ===\n")

        self.run_test("Synthetic Bundle -> Pipeline Run", test_pipeline_run)
        self.run_test("Command Line Flow", test_cli)
        self.run_test("Variant Comparison", test_compare_flow)
        if self.include_slow:
            self.run_test("Planted Signal Acceptance", test_acceptance)

        self.print_test_summary()
        return self.test_results

    def run_test(self, test_name, module):
        """Run one flow module and record the result."""
        print(f"\n{'='*60}")
        print(f"Running: {test_name}")
        print(f"{'='*60}")

        suite = unittest.TestLoader().loadTestsFromModule(module)
        result = unittest.TextTestRunner(verbosity=1).run(suite)
        if result.errors:
            self.test_results.append((test_name, "ERROR", result.errors[0][1].strip().splitlines()[-1]))
        elif result.failures:
            self.test_results.append((test_name, "FAIL", result.failures[0][1].strip().splitlines()[-1]))
        else:
            self.test_results.append((test_name, "PASS", f"{result.testsRun} tests"))

    def print_test_summary(self):
        """Print test summary."""
        print("=== Test Summary ===")
        print("-" * 50)

        passed = sum(1 for _, status, _ in self.test_results if status == "PASS")
        failed = sum(1 for _, status, _ in self.test_results if status == "FAIL")
        errors = sum(1 for _, status, _ in self.test_results if status == "ERROR")

        print(f"Total Flows: {len(self.test_results)}")
        print(f"Passed: {passed}")
        print(f"Failed: {failed}")
        print(f"Errors: {errors}")
        print()

        if failed > 0 or errors > 0:
            print("Failed/Error Details:")
            for test_name, status, message in self.test_results:
                if status != "PASS":
                    print(f"  {test_name}: {status} - {message}")
        else:
            print("All flows passed.")


def main():
    """Main function to run the test suite."""
    test_suite = UserFlowTestSuite(include_slow="--slow" in sys.argv[1:])
    return test_suite.run_all_tests()


if __name__ == "__main__":
    main()
