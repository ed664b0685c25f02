"""Reading and writing bracketed and discbracket treebank files.

Both formats put one tree per line.  `bracketed` is the classic
parenthesized form with implicitly numbered words:

    (S (NP John) (VP runs))

`discbracket` names the position of every word explicitly, which is what
makes discontinuous yields expressible:

    (S (VP 0=Allerdings (PP 2=in 3=bestimmten 4=Vierteln)) 1=wird 5=Wasser)

A backslash escapes the next character; words containing parentheses,
whitespace, `=`, or backslashes are escaped on output so that
parse(emit(tree)) is the identity on canonical trees.
"""

import gzip
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .tree import Constituent, ConstituentTree, is_continuous, validate

_WORD_ESCAPED = set("()=\\ \t\n")
_LABEL_ESCAPED = set("()\\ \t\n")  # a leading atom is always the label, so = stays raw


class TreebankError(Exception):
    """Malformed treebank input."""

    def __init__(self, message: str, *, source: str | None = None,
                 line_no: int | None = None, offset: int | None = None):
        self.message = message
        self.source = source
        self.line_no = line_no
        self.offset = offset
        where = ""
        if source is not None or line_no is not None:
            where = f" ({source or '<string>'}:{line_no})"
        at = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}{at}")


@dataclass(frozen=True)
class ParseFailure:
    """One skipped line collected in lenient mode."""

    line_no: int
    offset: int | None
    message: str


@dataclass(frozen=True)
class Treebank:
    trees: tuple[ConstituentTree, ...]
    source: str | None = None
    errors: tuple[ParseFailure, ...] = field(default=())

    def __iter__(self) -> Iterator[ConstituentTree]:
        return iter(self.trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __getitem__(self, i: int) -> ConstituentTree:
        return self.trees[i]


# A token is ("(", offset), (")", offset), or ("atom", offset, parts) where
# parts is the atom text split on unescaped "=" with escapes resolved.
def _tokenize(line: str) -> list[tuple]:
    tokens: list[tuple] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        if ch in "()":
            tokens.append((ch, i))
            i += 1
            continue
        start = i
        parts: list[str] = []
        current: list[str] = []
        while i < n and line[i] not in "() \t":
            if line[i] == "\\":
                if i + 1 >= n:
                    raise _offset_error("dangling backslash escape", line, i)
                current.append(line[i + 1])
                i += 2
            elif line[i] == "=":
                parts.append("".join(current))
                current = []
                i += 1
            else:
                current.append(line[i])
                i += 1
        parts.append("".join(current))
        tokens.append(("atom", start, parts))
    return tokens


def _byte_offset(line: str, char_index: int) -> int:
    return len(line[:char_index].encode("utf-8"))


def _offset_error(message: str, line: str, char_index: int) -> TreebankError:
    return TreebankError(message, offset=_byte_offset(line, char_index))


def _parse_line(line: str, discontinuous: bool) -> ConstituentTree:
    tokens = _tokenize(line)
    if not tokens:
        raise TreebankError("empty line where a tree was expected", offset=0)
    pos = 0  # cursor into tokens
    words: dict[int, str] = {}  # position -> word
    next_index = 0  # implicit numbering for the bracketed format

    def take_leaf(token: tuple) -> int:
        nonlocal next_index
        _, start, parts = token
        if discontinuous:
            if len(parts) != 2 or not parts[0].isdigit():
                raise _offset_error(
                    "discbracket leaf must look like index=word", line, start)
            index = int(parts[0])
            word = parts[1]
        else:
            index = next_index
            next_index += 1
            word = "=".join(parts)
        if index in words:
            raise _offset_error(f"position {index} appears twice", line, start)
        words[index] = word
        return index

    def parse_node() -> Constituent:
        nonlocal pos
        open_tok = tokens[pos]
        pos += 1  # past "("
        if pos >= len(tokens) or tokens[pos][0] != "atom":
            raise _offset_error("expected a label after '('", line, open_tok[1])
        label = "=".join(tokens[pos][2])
        if not label:
            raise _offset_error("empty label", line, tokens[pos][1])
        pos += 1
        children: list[Constituent | int] = []
        while pos < len(tokens) and tokens[pos][0] != ")":
            if tokens[pos][0] == "(":
                children.append(parse_node())
            else:
                children.append(take_leaf(tokens[pos]))
                pos += 1
        if pos >= len(tokens):
            raise _offset_error("unbalanced '(': missing ')'", line, open_tok[1])
        if not children:
            raise _offset_error(f"constituent {label!r} has no children",
                                line, open_tok[1])
        pos += 1  # past ")"
        return Constituent(label, tuple(children))

    if tokens[0][0] != "(":
        raise _offset_error("a tree must start with '('", line, tokens[0][1])
    root = parse_node()
    if pos != len(tokens):
        raise _offset_error("trailing material after the tree", line, tokens[pos][1])

    if words and sorted(words) != list(range(max(words) + 1)):
        missing = sorted(set(range(max(words) + 1)) - set(words))
        raise TreebankError(f"missing word positions {missing}", offset=0)
    sentence = tuple(words[i] for i in range(len(words)))
    tree = ConstituentTree(sentence, root)
    violation = validate(tree)
    if violation is not None:
        raise TreebankError(f"invalid tree: {violation.rule}: {violation.detail}",
                            offset=0)
    return tree


def parse_bracketed(line: str) -> ConstituentTree:
    """Parse one bracketed tree; words are numbered left to right from 0."""
    return _parse_line(line, discontinuous=False)


def parse_discbracket(line: str) -> ConstituentTree:
    """Parse one discbracket tree with explicit index=word leaves."""
    return _parse_line(line, discontinuous=True)


def _escape(text: str, escaped: set[str]) -> str:
    return "".join("\\" + ch if ch in escaped else ch for ch in text)


def emit_bracketed(tree: ConstituentTree) -> str:
    """Render a continuous tree as a single bracketed line."""
    if not is_continuous(tree):
        raise TreebankError(
            "tree has discontinuous constituents; emit_discbracket can express them")

    def render(node: Constituent) -> str:
        parts = [_escape(node.label, _LABEL_ESCAPED)]
        for child in node.children:
            if isinstance(child, int):
                parts.append(_escape(tree.sentence[child], _WORD_ESCAPED))
            else:
                parts.append(render(child))
        return "(" + " ".join(parts) + ")"

    return render(tree.root)


def emit_discbracket(tree: ConstituentTree) -> str:
    """Render any tree as a single discbracket line."""

    def render(node: Constituent) -> str:
        parts = [_escape(node.label, _LABEL_ESCAPED)]
        for child in node.children:
            if isinstance(child, int):
                parts.append(f"{child}={_escape(tree.sentence[child], _WORD_ESCAPED)}")
            else:
                parts.append(render(child))
        return "(" + " ".join(parts) + ")"

    return render(tree.root)


def _open_text(path: str | Path, mode: str):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def parse_treebank(lines: Iterable[str], fmt: str = "discbracket", *,
                   lenient: bool = False, source: str | None = None) -> Treebank:
    """Parse one tree per line; blank lines are skipped.

    In strict mode (default) the first malformed line raises TreebankError
    carrying the source name, 1-based line number, and byte offset.  With
    lenient=True bad lines are skipped and collected on Treebank.errors.
    """
    if fmt not in ("bracketed", "discbracket"):
        raise ValueError(f"unknown treebank format {fmt!r}")
    discontinuous = fmt == "discbracket"
    trees: list[ConstituentTree] = []
    failures: list[ParseFailure] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            trees.append(_parse_line(line.rstrip("\n"), discontinuous))
        except TreebankError as err:
            if not lenient:
                raise TreebankError(err.message, source=source,
                                    line_no=line_no, offset=err.offset) from err
            failures.append(ParseFailure(line_no, err.offset, err.message))
    return Treebank(tuple(trees), source=source, errors=tuple(failures))


def load_treebank(path: str | Path, fmt: str = "discbracket", *,
                  lenient: bool = False) -> Treebank:
    """Load a treebank file; `.gz` paths are decompressed transparently."""
    with _open_text(path, "r") as handle:
        return parse_treebank(handle, fmt, lenient=lenient, source=str(path))


def save_treebank(trees: Iterable[ConstituentTree], path: str | Path,
                  fmt: str = "discbracket") -> None:
    """Write one tree per line with a single newline terminator each."""
    emit = {"bracketed": emit_bracketed, "discbracket": emit_discbracket}[fmt]
    with _open_text(path, "w") as handle:
        for tree in trees:
            handle.write(emit(tree))
            handle.write("\n")


def bundled(name: str) -> Treebank:
    """Load one of the treebanks shipped inside the package.

    Format follows the file extension; see the data/ directory for
    what is available (e.g. "toy20.discbracket", "cont5.bracketed").
    """
    from importlib.resources import files
    fmt = "discbracket" if name.endswith(".discbracket") else "bracketed"
    resource = files(__package__).joinpath("data", name)
    if not resource.is_file():
        raise TreebankError(f"no bundled treebank named {name!r}")
    with resource.open("r", encoding="utf-8") as handle:
        return parse_treebank(handle, fmt, source=name)
