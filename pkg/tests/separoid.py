"""The seven separoid rules as implications between separation queries."""

from sigmacalc.separation import separated


def check_rule(g, rule: int, a, b, c, d) -> tuple[bool, bool]:
    """Return ``(premise, conclusion)`` for one instantiation of ``rule``."""

    def sep(x, y, z):
        return separated(g, x, y, z)

    if rule == 1:
        return True, sep(a, b, a)
    if rule == 2:
        return sep(a, b, d), sep(b, a, d)
    if rule == 3:
        return sep(a, b | c, d), sep(a, b, d)
    if rule == 4:
        return sep(a, b | c, d), sep(a, b, c | d)
    if rule == 5:
        return sep(a, b, c | d) and sep(a, c, d), sep(a, b | c, d)
    if rule == 6:
        return sep(a, b, c | d) and sep(a, c, b | d), sep(a, b | c, d)
    if rule == 7:
        return sep(a, b, d) and sep(a, c, d), sep(a, b | c, d)
    raise ValueError(rule)
