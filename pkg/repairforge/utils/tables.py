from typing import Sequence

from prettytable import PrettyTable


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """
    Render rows as a left-aligned text table.

    Args:
        headers: Column titles (must be distinct)
        rows: Cell values

    Returns:
        Table text ending in a newline
    """
    pt = PrettyTable()
    pt.field_names = list(headers)
    pt.align = "l"
    for row in rows:
        pt.add_row(list(row))
    return pt.get_string() + "\n"
