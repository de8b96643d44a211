"""Per-criterion outcomes shared between the acceptance tests and the summary hook."""

# criterion number -> (passed, summary)
RESULTS: dict = {}


def record(n: int, violations: list, summary: str) -> None:
    ok = not violations
    line = summary if ok else f"{summary}; {len(violations)} violation(s), first: {violations[0]}"
    RESULTS[n] = (ok, line)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {line}")
