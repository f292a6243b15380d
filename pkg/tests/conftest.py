import mpmath
import pytest


def series_i(a, x, dps=120):
    """I_a(x) from its ascending series in high precision."""
    with mpmath.workdps(dps):
        a, x = mpmath.mpf(a), mpmath.mpf(x)
        q = (x / 2) ** 2
        term = (x / 2) ** a / mpmath.gamma(a + 1)
        total = term
        k = 0
        while True:
            k += 1
            term *= q / (k * (k + a))
            total += term
            if abs(term) < abs(total) * mpmath.mpf(10) ** (-dps + 5):
                return total


def series_k(a, x, dps=120):
    """K_a(x) = pi/2 (I_{-a} - I_a) / sin(a pi); integer orders by symmetric averaging."""
    with mpmath.workdps(dps + 40):

        def k_of(b):
            return mpmath.pi / 2 * (series_i(-b, x, dps + 40) - series_i(b, x, dps + 40)) / mpmath.sin(b * mpmath.pi)

        a = mpmath.mpf(a)
        if abs(a - mpmath.nint(a)) < mpmath.mpf("1e-6"):
            d = mpmath.mpf("1e-30")
            return (k_of(a + d) + k_of(a - d)) / 2
        return k_of(a)


@pytest.fixture
def bessel_oracle():
    return series_i, series_k


# ------------------------------------------------------ acceptance summary

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    if hasattr(report, "wasxfail"):
        status = "FAIL (expected, documented)"
    else:
        status = "PASS" if report.passed else "FAIL"
    _CRITERIA.append((marker.args[0], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {label}: {status}  {detail}".rstrip())
