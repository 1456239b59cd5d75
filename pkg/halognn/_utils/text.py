import typing

HorizontalAlignment = typing.Literal["left", "center", "right"]
_XALIGN: dict[HorizontalAlignment, typing.Callable[[str, int], str]] = {
    "left": lambda s, width: f"{s:<{width}}",
    "center": lambda s, width: f"{s:^{width}}",
    "right": lambda s, width: f"{s:>{width}}",
}


def align(strs: typing.Iterable[str], alignment: HorizontalAlignment) -> list[str]:
    """Horizontal alignment of strings in a common width."""
    strs = tuple(s.strip() for s in strs)
    width = max((len(s) for s in strs), default=0)
    return [_XALIGN[alignment](s, width) for s in strs]


def format_cell(value: typing.Any) -> str:
    """Render a table cell: floats in short scientific / fixed notation, everything else via str."""
    if isinstance(value, float):
        return f"{value:.6g}" if value == 0.0 or 1e-3 <= abs(value) < 1e6 else f"{value:.4e}"
    return str(value)


def render_table(
    header: typing.Sequence[str],
    rows: typing.Iterable[typing.Sequence[typing.Any]],
    alignment: HorizontalAlignment = "right",
    sep: str = "  ",
) -> str:
    """Render rows as a text table with every column aligned to its widest cell."""
    columns = [[str(h), *cells] for h, cells in zip(header, zip(*[[format_cell(c) for c in r] for r in rows]))]
    # no rows: header only
    if not columns:
        columns = [[str(h)] for h in header]
    aligned = [align(column, alignment) for column in columns]
    lines = [sep.join(cells) for cells in zip(*aligned)]
    rule = "-" * max((len(line) for line in lines), default=0)
    return "\n".join([lines[0], rule, *lines[1:]])
