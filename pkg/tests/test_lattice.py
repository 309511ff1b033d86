"""Tests for lattice boxes, neighbours and embedding."""

import numpy as np
import pytest

from rwrc_lab.exceptions import DegenerateBoxError, DomainError, SiteNotInBoxError
from rwrc_lab.lattice import (
    BoxSpec,
    box_from_spec,
    build_box,
    cell_of,
    centred_cube,
    embed,
    neighbors,
    unit_cube,
)


class TestBuildBox:
    """Test box construction from (d, alpha, G)."""

    def test_strict_membership(self) -> None:
        """Sites on the boundary of alpha*G are excluded."""
        box = build_box(1, 4.0, [(0.0, 1.0)])
        assert box.sites[:, 0].tolist() == [1, 2, 3]

    def test_non_integer_alpha(self) -> None:
        """alpha = 2.5 on (0, 1) keeps 1 and 2."""
        box = build_box(1, 2.5, [(0.0, 1.0)])
        assert box.size == 2
        assert box.lower == (1,)

    def test_two_dimensional_shape(self) -> None:
        """Shape and C order of a 2-d box."""
        box = build_box(2, 1.0, [(0.5, 4.5), (0.5, 3.5)])
        assert box.shape == (4, 3)
        assert box.size == 12
        assert tuple(box.sites[1]) == (1, 2)
        assert box.upper == (4, 3)

    def test_degenerate_box(self) -> None:
        """No lattice point raises DegenerateBoxError."""
        with pytest.raises(DegenerateBoxError):
            build_box(1, 0.5, [(0.0, 1.0)])

    def test_malformed_domain(self) -> None:
        """Wrong number of intervals is a DomainError."""
        with pytest.raises(DomainError):
            build_box(2, 1.0, [(0.0, 1.0)])

    def test_empty_interval(self) -> None:
        """lo >= hi is a DomainError."""
        with pytest.raises(DomainError):
            build_box(1, 1.0, [(1.0, 1.0)])

    def test_spec_round_trip(self) -> None:
        """A box rebuilt from its spec is equal."""
        box = build_box(2, 3.0, [(-1.0, 1.0), (0.0, 2.0)])
        assert box_from_spec(box.spec()) == box

    def test_box_spec_validation(self) -> None:
        """BoxSpec rejects a G of the wrong length."""
        with pytest.raises(ValueError):
            BoxSpec(d=2, alpha=1.0, G=[(0.0, 1.0)])


class TestCubes:
    """Test the cube helpers."""

    def test_centred_cube(self) -> None:
        """Q_n has 2n+1 sites per axis, centred at 0."""
        box = centred_cube(2, 3)
        assert box.shape == (7, 7)
        assert box.lower == (-3, -3)
        assert box.origin_site() == (0, 0)

    def test_singleton_cube(self) -> None:
        """Q_0 is the origin."""
        box = centred_cube(1, 0)
        assert box.size == 1
        assert box.site(0) == (0,)

    def test_negative_radius(self) -> None:
        """Negative radius is rejected."""
        with pytest.raises(DomainError):
            centred_cube(1, -1)

    def test_unit_cube(self) -> None:
        """alpha*(0,1) with integer alpha has alpha-1 sites."""
        assert unit_cube(1, 8).size == 7


class TestSites:
    """Test indexing, neighbours and embedding."""

    def test_index_round_trip(self, square_box) -> None:
        """index and site are inverse."""
        for k in range(square_box.size):
            assert square_box.index(square_box.site(k)) == k

    def test_index_outside(self, square_box) -> None:
        """Indexing a foreign site raises SiteNotInBoxError."""
        with pytest.raises(SiteNotInBoxError):
            square_box.index((0, 1))

    def test_neighbors_order_and_flags(self, path_box) -> None:
        """Neighbours come as +e1, -e1 with in-box flags."""
        result = neighbors(path_box, (1,))
        assert [(n.sign, n.site, n.in_box) for n in result] == [(1, (2,), True), (-1, (0,), False)]
        assert result[0].direction == (1,)

    def test_neighbor_count(self, square_box) -> None:
        """Every site has 2d neighbours."""
        assert len(neighbors(square_box, (2, 2))) == 4
        assert all(n.in_box for n in neighbors(square_box, (2, 2)))

    def test_neighbors_outside(self, path_box) -> None:
        """Neighbours of a foreign site raise."""
        with pytest.raises(SiteNotInBoxError):
            neighbors(path_box, (9,))

    def test_embed_and_cell_of(self) -> None:
        """cell_of inverts embed on lattice points."""
        box = build_box(2, 3.0, [(0.0, 2.0), (0.0, 2.0)])
        for z in box.sites[:5]:
            y = embed(box, z)
            np.testing.assert_allclose(y, z / 3.0)
            assert cell_of(box, y) == tuple(z)

    def test_cell_of_interior_point(self) -> None:
        """A point inside a cell maps to its lower corner."""
        box = build_box(1, 4.0, [(0.0, 1.0)])
        assert cell_of(box, [0.3]) == (1,)

    def test_halo_covers_box(self, square_box) -> None:
        """The halo grid has one extra layer below the box."""
        assert square_box.halo_lower == (0, 0)
        assert square_box.halo_shape == (5, 4)
        assert square_box.halo_cells.shape == (20, 2)
