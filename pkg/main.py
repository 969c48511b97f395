from bernstein import bernstein_grid_report, list_catalog
from laplace import log_grid
from regvar import estimate_rv_index


def main():
    """
    Smoke entry point.
    Evaluates every catalog exponent and prints a short summary.
    """

    print("🔧 Loading exponent catalog...")
    entries = list_catalog()
    grid = log_grid(1e-6, 1e6, 61)

    print(f"📐 Checking Bernstein properties on {grid.size} points...")
    failures = 0
    for entry in entries:
        exp = entry.exponent
        report = bernstein_grid_report(exp, grid)
        ok = report["increasing"] and report["concave"] and report["bernstein_inequality"]
        failures += not ok
        fit = estimate_rv_index(lambda x: float(exp.phi_prime(x)), 1e10)
        mark = "✅" if ok else "❌"
        print(f" {mark} {exp.name:<22} phi(1)={float(exp.phi(1.0)):.6g}  alpha≈{fit.alpha:.3f} (expected {entry.expected_alpha:g})")

    if failures:
        print(f"❌ {failures} exponent(s) failed the grid checks.")
        return 1
    print(f"✅ All {len(entries)} exponents look like Bernstein functions.")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
