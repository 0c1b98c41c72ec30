"""Refined disk covers of the limit set by iterated inverse branches.

Level 0 is the 2m scheme disks; level n+1 consists of the exact Moebius
images of the level-n disks under all admissible inverse branches.  Each
disk is recorded with its branch chain, so the unique level-n disk
containing any admissible branch image can be looked up exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RefinementOverflowError
from .scheme import Disk, SchottkyScheme, moebius_disk_image, validate_scheme

Chain = tuple[int, ...]


@dataclass(frozen=True)
class DiskCover:
    """Level-n cover; chain = (branch letters ..., base disk index)."""

    level: int
    disks: tuple[Disk, ...]
    chains: tuple[Chain, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.chains)})

    def __len__(self) -> int:
        return len(self.disks)

    def scheme_index(self, p: int) -> int:
        """Index j of the scheme disk containing cover disk p."""
        return self.chains[p][0]

    def admissible_branches(self, p: int) -> list[int]:
        j = self.scheme_index(p)
        return [i for i in range(1, 2 * self.m + 1)
                if (i - j - self.m) % (2 * self.m) != 0]

    def branch_target(self, p: int, branch: int) -> int:
        """Index of the cover disk containing gamma_branch^-1(E_p)."""
        chain = (branch,) + self.chains[p][:-1]
        return self._index[chain]

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        return tuple(d.interval for d in self.disks)


def level0_cover(scheme: SchottkyScheme) -> DiskCover:
    return DiskCover(
        level=0,
        disks=scheme.disks,
        chains=tuple((j,) for j in scheme.letters),
        m=scheme.m,
    )


def refine(scheme: SchottkyScheme, n: int, max_disks: int = 20_000) -> DiskCover:
    """Level-n cover of the limit set; disk count is 2m (2m-1)^n."""
    validate_scheme(scheme).require()
    if n < 0:
        raise ValueError("level must be >= 0")
    cover = level0_cover(scheme)
    for _ in range(n):
        count = len(cover) * (2 * scheme.m - 1)
        if count > max_disks:
            raise RefinementOverflowError(
                f"refinement would need {count} disks (cap {max_disks})")
        disks: list[Disk] = []
        chains: list[Chain] = []
        for p, parent in enumerate(cover.disks):
            for i in cover.admissible_branches(p):
                g_inv = scheme.generator(i).inverse()
                disks.append(moebius_disk_image(g_inv, parent))
                chains.append((i,) + cover.chains[p])
        cover = DiskCover(level=cover.level + 1, disks=tuple(disks),
                          chains=tuple(chains), m=scheme.m)
    return cover
