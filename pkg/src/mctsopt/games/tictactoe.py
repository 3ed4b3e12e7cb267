"""Tic-tac-toe with bitboard states; X is the maximizing player.

Cells are numbered 0..8 row-major.  The game is small enough for the
exact oracle, which makes it the reference environment for convergence
checks: perfect play from the empty board is a draw (0.5).
"""

from __future__ import annotations

from .base import GameState, PlayerRole

_WIN_MASKS = (
    0b000000111, 0b000111000, 0b111000000,   # rows
    0b001001001, 0b010010010, 0b100100100,   # columns
    0b100010001, 0b001010100,                # diagonals
)
_FULL = 0b111111111

# mask -> does it contain a complete line
_HAS_LINE = tuple(any(m & w == w for w in _WIN_MASKS) for m in range(512))
# occupied mask -> ordered tuple of empty cells
_EMPTY_CELLS = tuple(
    tuple(c for c in range(9) if not occ & (1 << c)) for occ in range(512)
)


class TicTacToeState(GameState):
    """One position: X bitboard, O bitboard, side to move."""

    __slots__ = ("xs", "os", "x_to_move")

    def __init__(self, xs: int = 0, os: int = 0, x_to_move: bool = True):
        self.xs = xs
        self.os = os
        self.x_to_move = x_to_move

    @property
    def to_move(self) -> PlayerRole:
        return PlayerRole.MAX if self.x_to_move else PlayerRole.MIN

    @property
    def terminal(self) -> bool:
        return (_HAS_LINE[self.xs] or _HAS_LINE[self.os]
                or (self.xs | self.os) == _FULL)

    @property
    def actions(self) -> tuple:
        if _HAS_LINE[self.xs] or _HAS_LINE[self.os]:
            return ()
        return _EMPTY_CELLS[self.xs | self.os]

    @property
    def terminal_return(self) -> float:
        if _HAS_LINE[self.xs]:
            return 1.0
        if _HAS_LINE[self.os]:
            return 0.0
        if (self.xs | self.os) != _FULL:
            raise ValueError("terminal_return is defined only at terminal states")
        return 0.5

    def apply(self, action) -> "TicTacToeState":
        bit = 1 << action
        if (self.xs | self.os) & bit or self.terminal:
            raise ValueError(f"illegal move {action}")
        if self.x_to_move:
            return TicTacToeState(self.xs | bit, self.os, False)
        return TicTacToeState(self.xs, self.os | bit, True)

    def state_key(self):
        return ("ttt", self.xs, self.os)

    def __eq__(self, other):
        return (isinstance(other, TicTacToeState) and self.xs == other.xs
                and self.os == other.os and self.x_to_move == other.x_to_move)

    def __hash__(self):
        return hash((self.xs, self.os, self.x_to_move))

    def __repr__(self):
        rows = []
        for r in range(3):
            row = ""
            for c in range(3):
                bit = 1 << (3 * r + c)
                row += "X" if self.xs & bit else "O" if self.os & bit else "."
            rows.append(row)
        return "\n".join(rows)


def empty_board() -> TicTacToeState:
    return TicTacToeState()


def reachable_states() -> list[TicTacToeState]:
    """All positions reachable from the empty board, in BFS order."""
    start = empty_board()
    seen = {start}
    frontier = [start]
    out = [start]
    while frontier:
        nxt = []
        for state in frontier:
            if state.terminal:
                continue
            for a in state.actions:
                child = state.apply(a)
                if child not in seen:
                    seen.add(child)
                    nxt.append(child)
                    out.append(child)
        frontier = nxt
    return out
