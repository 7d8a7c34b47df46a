//! Built-in example surfaces used by the tests and shipped as JSON fixtures.

use crate::field::{Fp, Rat};
use crate::surface::RawSurface;
use std::collections::BTreeMap;

fn q(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn rot(entries: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
    entries
        .iter()
        .map(|(p, ends)| {
            (
                p.to_string(),
                ends.iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect()
}

fn pts(entries: &[(&str, u64, i64, Option<&str>)]) -> Vec<(String, u64, Rat, Option<String>)> {
    entries
        .iter()
        .map(|(n, m, l, b)| (n.to_string(), *m, q(*l), b.map(|s| s.to_string())))
        .collect()
}

fn arcs(entries: &[(&str, &str, &str)]) -> Vec<(String, String, String)> {
    entries
        .iter()
        .map(|(n, f, t)| (n.to_string(), f.to_string(), t.to_string()))
        .collect()
}

fn faces(entries: &[(&str, &[&str], u64, u64)]) -> Vec<(String, Vec<String>, u64, u64)> {
    entries
        .iter()
        .map(|(a, p, h, g)| {
            (
                a.to_string(),
                p.iter().map(|s| s.to_string()).collect(),
                *h,
                *g,
            )
        })
        .collect()
}

/// Partial triangulation of a disc: boundary points A, B, C (clockwise),
/// puncture D, arcs v: A-D and w: B-A.
pub fn t1() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", 1, 2, Some("o")),
            ("B", 1, 3, Some("o")),
            ("C", 2, 5, Some("o")),
            ("D", 3, 7, None),
        ]),
        boundaries: vec![("o".into(), vec!["A".into(), "C".into(), "B".into()])],
        arcs: arcs(&[("v", "A", "D"), ("w", "B", "A")]),
        rotations: rot(&[
            ("A", &["bnd:o:2-", "v+", "w-", "bnd:o:0+"]),
            ("B", &["bnd:o:1-", "w+", "bnd:o:2+"]),
            ("C", &["bnd:o:0-", "bnd:o:1+"]),
            ("D", &["v-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 1,
    }
}

/// Torus with a loop u at M and a free puncture N enclosed by it.
pub fn t2(m_loop: u64, m_enclosed: u64) -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("M", m_loop, 2, None), ("N", m_enclosed, 3, None)]),
        boundaries: vec![],
        arcs: arcs(&[("u", "M", "M")]),
        rotations: rot(&[("M", &["u+", "u-"])]),
        faces: faces(&[("u+", &["N"], 0, 0), ("u-", &[], 0, 1)]),
        genus: 1,
        boundary_count: 0,
    }
}

/// Disc around a triangle on three punctures; the boundary is a bare hole.
pub fn t3(m: u64) -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("M", m, 1, None), ("N", m, 1, None), ("P", m, 1, None)]),
        boundaries: vec![],
        arcs: arcs(&[("a", "M", "N"), ("b", "N", "P"), ("c", "P", "M")]),
        rotations: rot(&[
            ("M", &["c-", "a+"]),
            ("N", &["a-", "b+"]),
            ("P", &["b-", "c+"]),
        ]),
        faces: faces(&[("a-", &[], 1, 0)]),
        genus: 0,
        boundary_count: 1,
    }
}

/// The flip partner of [`t3`]: chain M-N-P with a loop at N around M.
pub fn t3_flipped(m: u64) -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("M", m, 1, None), ("N", m, 1, None), ("P", m, 1, None)]),
        boundaries: vec![],
        arcs: arcs(&[("a", "M", "N"), ("b", "N", "P"), ("c", "N", "N")]),
        rotations: rot(&[
            ("M", &["a+"]),
            ("N", &["a-", "c-", "b+", "c+"]),
            ("P", &["b-"]),
        ]),
        faces: faces(&[("b+", &[], 1, 0)]),
        genus: 0,
        boundary_count: 1,
    }
}

/// Sphere with four punctures, tetrahedral triangulation, all m = 1.
/// With these multiplicities this is the first exceptional triangulation.
pub fn t4() -> RawSurface<Rat> {
    sphere4_tetra(&[1, 1, 1, 1], &[1, 1, 1, 2])
}

/// Sphere with four punctures, m = (1,1,1,2): the resolution fixture.
pub fn t4b() -> RawSurface<Rat> {
    sphere4_tetra(&[1, 1, 1, 2], &[1, 1, 1, 1])
}

fn sphere4_tetra(m: &[u64; 4], lam: &[i64; 4]) -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", m[0], lam[0], None),
            ("B", m[1], lam[1], None),
            ("C", m[2], lam[2], None),
            ("D", m[3], lam[3], None),
        ]),
        boundaries: vec![],
        arcs: arcs(&[
            ("ab", "A", "B"),
            ("ac", "A", "C"),
            ("ad", "A", "D"),
            ("bc", "B", "C"),
            ("bd", "B", "D"),
            ("cd", "C", "D"),
        ]),
        rotations: rot(&[
            ("A", &["ab+", "ac+", "ad+"]),
            ("B", &["ab-", "bd+", "bc+"]),
            ("C", &["ac-", "bc-", "cd+"]),
            ("D", &["ad-", "cd-", "bd-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 0,
    }
}

/// Sphere with three punctures, multiplicities (2,2,2).
pub fn sphere3() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("A", 2, 1, None), ("B", 2, 2, None), ("C", 2, 3, None)]),
        boundaries: vec![],
        arcs: arcs(&[("ab", "A", "B"), ("bc", "B", "C"), ("ca", "C", "A")]),
        rotations: rot(&[
            ("A", &["ab+", "ca-"]),
            ("B", &["bc+", "ab-"]),
            ("C", &["ca+", "bc-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 0,
    }
}

/// Annulus with one marked point per boundary and a spanning arc.
pub fn annulus() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("P", 1, 1, Some("b1")), ("Q", 1, 1, Some("b2"))]),
        boundaries: vec![
            ("b1".into(), vec!["P".into()]),
            ("b2".into(), vec!["Q".into()]),
        ],
        arcs: arcs(&[("s", "P", "Q")]),
        rotations: rot(&[
            ("P", &["bnd:b1:0-", "s+", "bnd:b1:0+"]),
            ("Q", &["bnd:b2:0-", "s-", "bnd:b2:0+"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 2,
    }
}

/// Once-punctured annulus with a crossing arc.
pub fn annulus_punctured() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("P", 1, 1, Some("b1")),
            ("Q", 1, 1, Some("b2")),
            ("Z", 2, 5, None),
        ]),
        boundaries: vec![
            ("b1".into(), vec!["P".into()]),
            ("b2".into(), vec!["Q".into()]),
        ],
        arcs: arcs(&[("s", "P", "Q")]),
        rotations: rot(&[
            ("P", &["bnd:b1:0-", "s+", "bnd:b1:0+"]),
            ("Q", &["bnd:b2:0-", "s-", "bnd:b2:0+"]),
        ]),
        faces: faces(&[("s+", &["Z"], 0, 0)]),
        genus: 0,
        boundary_count: 2,
    }
}

/// Unpunctured square with one diagonal; only A has multiplicity above one.
pub fn polygon() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", 2, 1, Some("o")),
            ("B", 1, 1, Some("o")),
            ("C", 1, 1, Some("o")),
            ("D", 1, 1, Some("o")),
        ]),
        boundaries: vec![(
            "o".into(),
            vec!["A".into(), "D".into(), "C".into(), "B".into()],
        )],
        arcs: arcs(&[("g", "A", "C")]),
        rotations: rot(&[
            ("A", &["bnd:o:3-", "g+", "bnd:o:0+"]),
            ("B", &["bnd:o:2-", "bnd:o:3+"]),
            ("C", &["bnd:o:1-", "g-", "bnd:o:2+"]),
            ("D", &["bnd:o:0-", "bnd:o:1+"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 1,
    }
}

/// Once-punctured triangle with the radius arc; boundary multiplicities 1.
pub fn polygon_punctured() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", 1, 1, Some("o")),
            ("B", 1, 1, Some("o")),
            ("C", 1, 1, Some("o")),
            ("Z", 3, 2, None),
        ]),
        boundaries: vec![("o".into(), vec!["A".into(), "C".into(), "B".into()])],
        arcs: arcs(&[("r", "A", "Z")]),
        rotations: rot(&[
            ("A", &["bnd:o:2-", "r+", "bnd:o:0+"]),
            ("B", &["bnd:o:1-", "bnd:o:2+"]),
            ("C", &["bnd:o:0-", "bnd:o:1+"]),
            ("Z", &["r-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 1,
    }
}

/// Pentagon with a nested fan of two boundary-homotopic arcs at A.
pub fn fan() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", 1, 1, Some("o")),
            ("B", 1, 1, Some("o")),
            ("C", 1, 1, Some("o")),
            ("D", 1, 1, Some("o")),
            ("E", 1, 1, Some("o")),
        ]),
        boundaries: vec![(
            "o".into(),
            vec!["A".into(), "E".into(), "D".into(), "C".into(), "B".into()],
        )],
        arcs: arcs(&[("d1", "A", "C"), ("d2", "A", "D")]),
        rotations: rot(&[
            ("A", &["bnd:o:4-", "d1+", "d2+", "bnd:o:0+"]),
            ("B", &["bnd:o:3-", "bnd:o:4+"]),
            ("C", &["bnd:o:2-", "d1-", "bnd:o:3+"]),
            ("D", &["bnd:o:1-", "d2-", "bnd:o:2+"]),
            ("E", &["bnd:o:0-", "bnd:o:1+"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 1,
    }
}

/// One-vertex one-loop Brauer graph realized on its surface: every face
/// keeps a bare hole, so the partial triangulation is sparse.
pub fn bga_loop() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("M", 1, 2, None)]),
        boundaries: vec![],
        arcs: arcs(&[("u", "M", "M")]),
        rotations: rot(&[("M", &["u+", "u-"])]),
        faces: faces(&[("u+", &[], 1, 0), ("u-", &[], 1, 0)]),
        genus: 0,
        boundary_count: 2,
    }
}

/// Star with three edges and multiplicities (1,2,3) at the leaves.
pub fn bga_star() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("Z", 1, 1, None),
            ("L1", 1, 2, None),
            ("L2", 2, 3, None),
            ("L3", 3, 5, None),
        ]),
        boundaries: vec![],
        arcs: arcs(&[("s1", "Z", "L1"), ("s2", "Z", "L2"), ("s3", "Z", "L3")]),
        rotations: rot(&[
            ("Z", &["s1+", "s2+", "s3+"]),
            ("L1", &["s1-"]),
            ("L2", &["s2-"]),
            ("L3", &["s3-"]),
        ]),
        faces: faces(&[("s1+", &[], 1, 0)]),
        genus: 0,
        boundary_count: 1,
    }
}

/// Planar theta graph: two vertices joined by three edges.
pub fn bga_theta() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("X", 1, 2, None), ("Y", 1, 3, None)]),
        boundaries: vec![],
        arcs: arcs(&[("h1", "X", "Y"), ("h2", "X", "Y"), ("h3", "X", "Y")]),
        rotations: rot(&[
            ("X", &["h1+", "h2+", "h3+"]),
            ("Y", &["h1-", "h3-", "h2-"]),
        ]),
        faces: faces(&[("h1+", &[], 1, 0), ("h2+", &[], 1, 0), ("h3+", &[], 1, 0)]),
        genus: 0,
        boundary_count: 3,
    }
}

/// Sphere with four punctures triangulated with a special self-folded
/// triangle: loop l at B around A with radius r.
pub fn self_folded_sphere() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("A", 1, 1, None),
            ("B", 1, 1, None),
            ("C", 1, 1, None),
            ("D", 1, 3, None),
        ]),
        boundaries: vec![],
        arcs: arcs(&[
            ("e1", "B", "C"),
            ("e1x", "B", "C"),
            ("e2", "B", "D"),
            ("e3", "C", "D"),
            ("l", "B", "B"),
            ("r", "B", "A"),
        ]),
        rotations: rot(&[
            ("A", &["r-"]),
            ("B", &["l+", "r+", "l-", "e1x+", "e2+", "e1+"]),
            ("C", &["e1-", "e3+", "e1x-"]),
            ("D", &["e2-", "e3-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 0,
    }
}

/// The second exceptional triangulation of the four-punctured sphere.
pub fn spectria2() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[
            ("T", 1, 1, None),
            ("L", 1, 1, None),
            ("R", 1, 1, None),
            ("B", 1, 3, None),
        ]),
        boundaries: vec![],
        arcs: arcs(&[
            ("a", "T", "L"),
            ("b", "T", "R"),
            ("c1", "T", "B"),
            ("c2", "T", "B"),
            ("d", "L", "B"),
            ("e", "R", "B"),
        ]),
        rotations: rot(&[
            ("T", &["a+", "c1+", "b+", "c2+"]),
            ("L", &["a-", "d+"]),
            ("R", &["b-", "e+"]),
            ("B", &["c1-", "d-", "c2-", "e-"]),
        ]),
        faces: faces(&[]),
        genus: 0,
        boundary_count: 0,
    }
}

/// Two-vertex triangulation of the torus (two punctures, all faces
/// triangles).
pub fn torus2() -> RawSurface<Rat> {
    RawSurface {
        points: pts(&[("P", 1, 2, None), ("Q", 1, 3, None)]),
        boundaries: vec![],
        arcs: arcs(&[
            ("a", "P", "Q"),
            ("b", "Q", "P"),
            ("d1", "P", "Q"),
            ("d2", "Q", "P"),
            ("v", "P", "P"),
            ("w", "Q", "Q"),
        ]),
        rotations: rot(&[
            ("P", &["a+", "d1+", "v+", "b-", "d2-", "v-"]),
            ("Q", &["a-", "d1-", "w-", "b+", "d2+", "w+"]),
        ]),
        faces: faces(&[]),
        genus: 1,
        boundary_count: 0,
    }
}

/// Loop at a base point around a special puncture plus one fan arc; the
/// torus example with m_N = 1 after adding nothing. Used for retagging.
pub fn t2_special(m_loop: u64) -> RawSurface<Rat> {
    t2(m_loop, 1)
}

/// F_2 variant of a monogon around a puncture of multiplicity two (the
/// characteristic-two sparseness example).
pub fn monogon_m2_fp2() -> RawSurface<Fp> {
    RawSurface {
        points: vec![
            ("M".into(), 2, Fp::new(1, 2), None),
            ("N".into(), 2, Fp::new(1, 2), None),
        ],
        boundaries: vec![],
        arcs: arcs(&[("u", "M", "M")])
            .into_iter()
            .collect(),
        rotations: rot(&[("M", &["u+", "u-"])]),
        faces: faces(&[("u+", &["N"], 0, 0), ("u-", &[], 0, 1)]),
        genus: 1,
        boundary_count: 0,
    }
}

/// The same monogon over Q.
pub fn monogon_m2_rat() -> RawSurface<Rat> {
    t2(2, 2)
}

/// Every rational fixture of the battery with a stable name.
pub fn suite() -> Vec<(&'static str, RawSurface<Rat>)> {
    vec![
        ("t1", t1()),
        ("t2_m1", t2(1, 2)),
        ("t2_m2", t2(2, 2)),
        ("t2_m3", t2(3, 2)),
        ("t2_special", t2_special(2)),
        ("t3_m1", t3(1)),
        ("t3_m2", t3(2)),
        ("t3_flipped_m1", t3_flipped(1)),
        ("t3_flipped_m2", t3_flipped(2)),
        ("t4", t4()),
        ("t4b", t4b()),
        ("sphere3", sphere3()),
        ("annulus", annulus()),
        ("annulus_punctured", annulus_punctured()),
        ("polygon", polygon()),
        ("polygon_punctured", polygon_punctured()),
        ("fan", fan()),
        ("bga_loop", bga_loop()),
        ("bga_star", bga_star()),
        ("bga_theta", bga_theta()),
        ("self_folded_sphere", self_folded_sphere()),
        ("spectria2", spectria2()),
        ("torus2", torus2()),
    ]
}
