"""Independent tallies and measures for the fixture corpora over suite3.epd,
written to compare_oracle.tsv (min_games = 1)."""
import math
from collections import defaultdict

import chess
import chess.pgn

from gen_corpora import jsd_similarity


def key(board):
    return board.epd()


def tallies(path, depth=40):
    book = defaultdict(lambda: defaultdict(lambda: [0, 0, 0]))
    with open(path) as f:
        while (game := chess.pgn.read_game(f)) is not None:
            res = game.headers["Result"]
            col = {"1-0": 0, "1/2-1/2": 1, "0-1": 2}[res]
            board = game.board()
            for ply, move in enumerate(game.mainline_moves()):
                if ply >= depth:
                    break
                book[key(board)][board.san(move)][col] += 1
                board.push(move)
    return book


def ranked(moves):
    items = sorted(moves.items(), key=lambda kv: (-sum(kv[1]), kv[0].encode()))
    return [(san, sum(t), t) for san, t in items]


def measures(a, b):
    sa, sb = {m[0] for m in a}, {m[0] for m in b}
    union = sa | sb
    ov = len(sa & sb) / len(union)
    ra = {m[0]: i + 1 for i, m in enumerate(a)}
    rb = {m[0]: i + 1 for i, m in enumerate(b)}
    k1, k2 = len(a), len(b)
    foot = sum(abs(1 / ra.get(s, k1 + 1) - 1 / rb.get(s, k2 + 1)) for s in union)
    maxm = sum(abs(1 / i - 1 / (k2 + 1)) for i in range(1, k1 + 1)) + \
        sum(abs(1 / j - 1 / (k1 + 1)) for j in range(1, k2 + 1))
    m = 1 - foot / maxm
    jsd = jsd_similarity({s: g for s, g, _ in a}, {s: g for s, g, _ in b})
    return m, maxm, jsd, ov


def ew(lst):
    g = sum(x[1] for x in lst)
    pts = sum(t[0] + t[1] / 2 for _, _, t in lst)
    return 100 * pts / g, g


if __name__ == "__main__":
    pa, pb = tallies("corpus_pb.pgn"), tallies("corpus_comp.pgn")
    rows = []
    with open("suite3.epd") as f:
        for line in f:
            board, ops = chess.Board.from_epd(line)
            a, b = ranked(pa[key(board)]), ranked(pb[key(board)])
            m, maxm, jsd, ov = measures(a, b)
            e1, g1 = ew(a)
            e2, g2 = ew(b)
            rows.append([ops["id"], repr(m), repr(maxm), repr(jsd), repr(ov),
                         str(len(a)), str(len(b)), repr(e1), str(g1), repr(e2), str(g2)])
    with open("compare_oracle.tsv", "w") as out:
        out.write("id\tM\tmaxM\tJSD\toverlap\tmoves1\tmoves2\tEw1\tgames1\tEw2\tgames2\n")
        for r in rows:
            out.write("\t".join(r) + "\n")
    print(open("compare_oracle.tsv").read())
