def pytest_runtest_logreport(report):
    # one visible line per acceptance criterion, pass or fail
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print("\n[criterion] %s: %s" % (name, "PASS" if report.passed else "FAIL"))
