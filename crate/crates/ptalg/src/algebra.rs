//! The finite-rank algebra of a partial triangulation, realized as an exact
//! structure-constant table on the winding basis.
//!
//! Normalization rewrites words of winding segments: full turns extract the
//! central factor, turns through an arc resolve through the tail of the
//! relation attached to that arc, windings into the boundary die, and a
//! surviving central factor kills everything in the arrow ideal. A hard
//! rewrite budget turns any unexpected loop into an error; correctness is
//! gated by the closure/associativity/oracle batteries rather than a
//! confluence argument.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{DenseMatrix, SparseSpan};
use crate::presentation::{f_circ, is_in_j, FCirc, FormalPath, PathCombination, Seg};
use crate::surface::{EdgeIx, OrientedEdge, Surface};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BasisElement {
    Idem(EdgeIx),
    Central(EdgeIx),
    Wind { start: OrientedEdge, steps: u64 },
}

/// A finite linear combination of basis elements.
pub type AlgebraElement<F> = BTreeMap<usize, F>;

pub fn add_into<F: Field>(acc: &mut AlgebraElement<F>, ix: usize, c: F) {
    let cur = acc.remove(&ix).unwrap_or_else(F::zero);
    let nv = cur + c;
    if !nv.is_zero() {
        acc.insert(ix, nv);
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraTable<F> {
    pub surface: Surface<F>,
    pub basis: Vec<BasisElement>,
    pub index: HashMap<BasisElement, usize>,
    /// products[i][j] = b_i * b_j as 0 or a scalar multiple of a basis element
    pub products: Vec<Vec<Option<(F, usize)>>>,
    fcirc: HashMap<OrientedEdge, Option<FCirc<F>>>,
    fuel_cap: u64,
}

pub fn basis_label<F: Field>(s: &Surface<F>, b: &BasisElement) -> String {
    match b {
        BasisElement::Idem(u) => format!("e_{}", s.edges[*u].name),
        BasisElement::Central(u) => format!("c_{}", s.edges[*u].name),
        BasisElement::Wind { start, steps } => crate::presentation::seg_text(
            s,
            &Seg {
                start: *start,
                steps: *steps,
            },
        ),
    }
}

/// The basis of the algebra: idempotents, central elements of inner arcs,
/// and admissible windings.
pub fn enumerate_basis<F: Field>(s: &Surface<F>) -> Vec<BasisElement> {
    let mut basis = Vec::new();
    for e in s.arc_indices() {
        basis.push(BasisElement::Idem(e));
    }
    for e in s.arc_indices() {
        if s.arc_is_inner(e) {
            basis.push(BasisElement::Central(e));
        }
    }
    let mut points: Vec<usize> = (0..s.points.len()).collect();
    points.sort_by(|&a, &b| s.points[a].name.cmp(&s.points[b].name));
    for p in points {
        let rot = s.rotation_at(p).to_vec();
        let mut starts: Vec<OrientedEdge> = rot
            .iter()
            .copied()
            .filter(|oe| !s.is_boundary_edge(oe.edge))
            .collect();
        starts.sort_by_key(|&oe| s.end_token(oe));
        let full = s.full_degree(p);
        let m = s.m(p);
        for start in starts {
            if s.is_interior(p) {
                for k in 1..m * full {
                    basis.push(BasisElement::Wind { start, steps: k });
                }
            } else {
                let mut k = 1;
                while !s.winding_hits_boundary(start, k) {
                    basis.push(BasisElement::Wind { start, steps: k });
                    k += 1;
                }
            }
        }
    }
    basis
}

/// The closed-form rank of the algebra.
pub fn rank<F: Field>(s: &Surface<F>) -> u64 {
    let mut total = 0u64;
    for p in 0..s.points.len() {
        let d = s.arc_degree(p);
        if s.is_interior(p) {
            total += s.m(p) * d * d;
        } else {
            total += d * (d - 1).max(0) / 2;
        }
    }
    let f = s
        .arc_indices()
        .into_iter()
        .filter(|&e| {
            !s.is_interior(s.edges[e].from) && !s.is_interior(s.edges[e].to)
        })
        .count() as u64;
    total + f
}

struct Engine<'a, F: Field> {
    s: &'a Surface<F>,
    fcirc: &'a HashMap<OrientedEdge, Option<FCirc<F>>>,
    fuel_cap: u64,
}

impl<'a, F: Field> Engine<'a, F> {
    /// Normalize `coef * C^c * segs` to `None` (zero) or a scalar multiple
    /// of a basis element.
    fn reduce(
        &self,
        mut coef: F,
        mut c: u8,
        mut segs: Vec<Seg>,
    ) -> Result<Option<(F, BasisElement)>> {
        let mut fuel = self.fuel_cap;
        'outer: loop {
            if fuel == 0 {
                return Err(Error::DepthCapExceeded);
            }
            fuel -= 1;
            if coef.is_zero() {
                return Ok(None);
            }
            if c >= 2 {
                return Ok(None);
            }
            // Drop idempotent segments, keeping a marker if all vanish.
            if segs.len() > 1 {
                let filtered: Vec<Seg> = segs.iter().copied().filter(|s| s.steps > 0).collect();
                if filtered.is_empty() {
                    segs.truncate(1);
                } else if filtered.len() != segs.len() {
                    segs = filtered;
                }
            }
            // Boundary kills and central extraction.
            for i in 0..segs.len() {
                let seg = segs[i];
                if seg.steps == 0 {
                    continue;
                }
                if self.s.winding_hits_boundary(seg.start, seg.steps) {
                    return Ok(None);
                }
                let p = self.s.s(seg.start);
                let lim = self.s.m(p) * self.s.full_degree(p);
                if seg.steps >= lim {
                    if !self.s.arc_is_inner(seg.start.edge) {
                        return Ok(None);
                    }
                    c += 1;
                    if c >= 2 {
                        return Ok(None);
                    }
                    coef = coef
                        * self
                            .s
                            .lambda(p)
                            .inv()
                            .ok_or_else(|| Error::Internal("zero lambda".into()))?;
                    segs[i].steps -= lim;
                    continue 'outer;
                }
            }
            // Junctions.
            let mut i = 0;
            while i + 1 < segs.len() {
                let a = segs[i];
                let b = segs[i + 1];
                if a.steps == 0 || b.steps == 0 {
                    i += 1;
                    continue;
                }
                let arrive = self.s.target_of(a.start, a.steps);
                if b.start == arrive {
                    segs[i].steps += b.steps;
                    segs.remove(i + 1);
                    continue 'outer;
                }
                if b.start == arrive.rev() {
                    // Turn through the arc of b.start: apply the relation.
                    let fc = self
                        .fcirc
                        .get(&b.start)
                        .and_then(|o| o.as_ref())
                        .ok_or_else(|| {
                            Error::Internal("turn at a boundary-adjacent arc survived".into())
                        })?;
                    segs[i].steps -= 1;
                    let cont = Seg {
                        start: self.s.succ(b.start),
                        steps: b.steps - 1,
                    };
                    segs[i + 1] = cont;
                    match fc {
                        FCirc::Zero => return Ok(None),
                        FCirc::Wind(sc, mid) => {
                            coef = coef * sc.clone();
                            segs.insert(i + 1, *mid);
                        }
                        FCirc::Cent(sc, _) => {
                            coef = coef * sc.clone();
                            c += 1;
                            if c >= 2 {
                                return Ok(None);
                            }
                        }
                    }
                    continue 'outer;
                }
                return Err(Error::Internal(format!(
                    "non-composable junction {:?} then {:?}",
                    a, b
                )));
            }
            // Fully merged: a single segment remains.
            debug_assert_eq!(segs.len(), 1);
            let seg = segs[0];
            if c == 1 {
                if seg.steps == 0 {
                    let u = seg.start.edge;
                    return Ok(if self.s.arc_is_inner(u) {
                        Some((coef, BasisElement::Central(u)))
                    } else {
                        None
                    });
                }
                if is_in_j(self.s, seg.start, seg.steps) {
                    return Ok(None);
                }
                // A central factor against a winding outside J: expand the
                // central element as the full turn at the far end and keep
                // rewriting.
                if !self.s.arc_is_inner(seg.start.edge) {
                    return Ok(None);
                }
                let piv = self.s.t(seg.start);
                coef = coef * self.s.lambda(piv);
                c = 0;
                segs = vec![
                    Seg {
                        start: seg.start.rev(),
                        steps: self.s.m(piv) * self.s.full_degree(piv),
                    },
                    seg,
                ];
                continue;
            }
            return Ok(Some(if seg.steps == 0 {
                (coef, BasisElement::Idem(seg.start.edge))
            } else {
                (coef, BasisElement::Wind {
                    start: seg.start,
                    steps: seg.steps,
                })
            }));
        }
    }
}

impl<F: Field> AlgebraTable<F> {
    pub fn build(surface: &Surface<F>) -> Result<AlgebraTable<F>> {
        let mut fcirc = HashMap::new();
        for v in surface.oriented_arcs() {
            fcirc.insert(v, f_circ(surface, v));
        }
        let max_md = (0..surface.points.len())
            .map(|p| surface.m(p) * surface.full_degree(p))
            .max()
            .unwrap_or(1);
        let fuel_cap = 8 * surface.arc_indices().len() as u64 * max_md + 64;
        let basis = enumerate_basis(surface);
        let index: HashMap<BasisElement, usize> = basis
            .iter()
            .copied()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let mut table = AlgebraTable {
            surface: surface.clone(),
            basis,
            index,
            products: Vec::new(),
            fcirc,
            fuel_cap,
        };
        let n = table.basis.len();
        if n as u64 != rank(surface) {
            return Err(Error::Internal(format!(
                "basis count {} does not match the rank formula {}",
                n,
                rank(surface)
            )));
        }
        let mut products = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                products[i][j] = table.multiply_raw(table.basis[i], table.basis[j])?;
            }
        }
        table.products = products;
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn source(&self, b: BasisElement) -> EdgeIx {
        match b {
            BasisElement::Idem(u) | BasisElement::Central(u) => u,
            BasisElement::Wind { start, .. } => start.edge,
        }
    }

    pub fn target(&self, b: BasisElement) -> EdgeIx {
        match b {
            BasisElement::Idem(u) | BasisElement::Central(u) => u,
            BasisElement::Wind { start, steps } => self.surface.target_of(start, steps).edge,
        }
    }

    fn word(&self, b: BasisElement) -> (u8, Vec<Seg>) {
        match b {
            BasisElement::Idem(u) => (0, vec![Seg::idem(OrientedEdge::fwd(u))]),
            BasisElement::Central(u) => (1, vec![Seg::idem(OrientedEdge::fwd(u))]),
            BasisElement::Wind { start, steps } => (0, vec![Seg { start, steps }]),
        }
    }

    /// Product of two basis elements from scratch (no table lookup).
    pub fn multiply_raw(
        &self,
        a: BasisElement,
        b: BasisElement,
    ) -> Result<Option<(F, usize)>> {
        if self.target(a) != self.source(b) {
            return Ok(None);
        }
        let (ca, mut sa) = self.word(a);
        let (cb, sb) = self.word(b);
        sa.extend(sb);
        let engine = Engine {
            s: &self.surface,
            fcirc: &self.fcirc,
            fuel_cap: self.fuel_cap,
        };
        match engine.reduce(F::one(), ca + cb, sa)? {
            None => Ok(None),
            Some((c, basis)) => {
                let ix = *self
                    .index
                    .get(&basis)
                    .ok_or_else(|| Error::Internal(format!("{basis:?} escaped the basis")))?;
                Ok(Some((c, ix)))
            }
        }
    }

    pub fn multiply(&self, i: usize, j: usize) -> Option<(F, usize)> {
        self.products[i][j].clone()
    }

    pub fn multiply_elements(
        &self,
        a: &AlgebraElement<F>,
        b: &AlgebraElement<F>,
    ) -> AlgebraElement<F> {
        let mut out = AlgebraElement::new();
        for (i, ca) in a {
            for (j, cb) in b {
                if let Some((c, k)) = &self.products[*i][*j] {
                    add_into(&mut out, *k, ca.clone() * cb.clone() * c.clone());
                }
            }
        }
        out
    }

    /// Normalize an arbitrary formal path to algebra coordinates.
    pub fn normalize_path(&self, coef: F, p: &FormalPath) -> Result<AlgebraElement<F>> {
        let engine = Engine {
            s: &self.surface,
            fcirc: &self.fcirc,
            fuel_cap: self.fuel_cap,
        };
        let mut out = AlgebraElement::new();
        match engine.reduce(coef, p.c_factors, p.segs.clone())? {
            None => {}
            Some((c, b)) => {
                let ix = *self
                    .index
                    .get(&b)
                    .ok_or_else(|| Error::Internal(format!("{b:?} escaped the basis")))?;
                add_into(&mut out, ix, c);
            }
        }
        Ok(out)
    }

    pub fn normalize_combination(&self, comb: &PathCombination<F>) -> Result<AlgebraElement<F>> {
        let mut out = AlgebraElement::new();
        for (c, p) in &comb.terms {
            for (ix, x) in self.normalize_path(c.clone(), p)? {
                add_into(&mut out, ix, x);
            }
        }
        Ok(out)
    }

    pub fn check_associativity(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let ij = &self.products[i][j];
                for k in 0..n {
                    let left = match ij {
                        None => None,
                        Some((c, x)) => self.products[*x][k]
                            .clone()
                            .map(|(d, y)| (c.clone() * d, y)),
                    };
                    let right = match &self.products[j][k] {
                        None => None,
                        Some((c, x)) => self.products[i][*x]
                            .clone()
                            .map(|(d, y)| (c.clone() * d, y)),
                    };
                    let eq = match (&left, &right) {
                        (None, None) => true,
                        (Some((c, x)), Some((d, y))) => x == y && c == d,
                        (Some((c, _)), None) => c.is_zero(),
                        (None, Some((d, _))) => d.is_zero(),
                    };
                    if !eq {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn check_identity(&self) -> bool {
        let idems: Vec<usize> = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, b)| matches!(b, BasisElement::Idem(_)))
            .map(|(i, _)| i)
            .collect();
        for (i, _) in self.basis.iter().enumerate() {
            let mut left = AlgebraElement::new();
            let mut right = AlgebraElement::new();
            for &e in &idems {
                if let Some((c, k)) = &self.products[e][i] {
                    add_into(&mut left, *k, c.clone());
                }
                if let Some((c, k)) = &self.products[i][e] {
                    add_into(&mut right, *k, c.clone());
                }
            }
            let expect: AlgebraElement<F> = [(i, F::one())].into_iter().collect();
            if left != expect || right != expect {
                return false;
            }
        }
        true
    }

    pub fn is_in_j_basis(&self, b: BasisElement) -> bool {
        match b {
            BasisElement::Idem(_) => false,
            BasisElement::Central(_) => true,
            BasisElement::Wind { start, steps } => is_in_j(&self.surface, start, steps),
        }
    }

    /// The central element C as coordinates: the sum of all central basis
    /// elements.
    pub fn central_sum(&self) -> AlgebraElement<F> {
        let mut out = AlgebraElement::new();
        for (i, b) in self.basis.iter().enumerate() {
            if matches!(b, BasisElement::Central(_)) {
                add_into(&mut out, i, F::one());
            }
        }
        out
    }

    pub fn commutes_with_everything(&self, z: &AlgebraElement<F>) -> bool {
        for j in 0..self.dim() {
            let bj: AlgebraElement<F> = [(j, F::one())].into_iter().collect();
            if self.multiply_elements(z, &bj) != self.multiply_elements(&bj, z) {
                return false;
            }
        }
        true
    }

    /// Basis of the centre: solve z b = b z over all basis elements.
    pub fn center_basis(&self) -> Vec<AlgebraElement<F>> {
        let n = self.dim();
        let mut rows = Vec::new();
        for j in 0..n {
            // constraint rows indexed by output coordinate
            let mut block = vec![vec![F::zero(); n]; n];
            for i in 0..n {
                if let Some((c, k)) = &self.products[i][j] {
                    block[*k][i] = block[*k][i].clone() + c.clone();
                }
                if let Some((c, k)) = &self.products[j][i] {
                    block[*k][i] = block[*k][i].clone() - c.clone();
                }
            }
            rows.extend(block.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
        }
        let kernel = DenseMatrix::from_rows(rows).kernel();
        kernel
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect()
    }

    /// {x : J x = x J = 0} as a list of coordinate vectors.
    pub fn socle_basis(&self) -> Vec<AlgebraElement<F>> {
        let n = self.dim();
        let j_elems: Vec<usize> = (0..n)
            .filter(|&i| self.is_in_j_basis(self.basis[i]))
            .collect();
        let mut rows = Vec::new();
        for &j in &j_elems {
            let mut left = vec![vec![F::zero(); n]; n];
            let mut right = vec![vec![F::zero(); n]; n];
            for i in 0..n {
                if let Some((c, k)) = &self.products[j][i] {
                    left[*k][i] = left[*k][i].clone() + c.clone();
                }
                if let Some((c, k)) = &self.products[i][j] {
                    right[*k][i] = right[*k][i].clone() + c.clone();
                }
            }
            rows.extend(left.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
            rows.extend(right.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
        }
        if rows.is_empty() {
            rows.push(vec![F::zero(); n]);
        }
        DenseMatrix::from_rows(rows)
            .kernel()
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect()
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<i64>> {
        let arcs = self.surface.arc_indices();
        let pos: HashMap<EdgeIx, usize> =
            arcs.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut m = vec![vec![0i64; arcs.len()]; arcs.len()];
        for b in &self.basis {
            m[pos[&self.source(*b)]][pos[&self.target(*b)]] += 1;
        }
        m
    }

    pub fn cartan_det_abs(&self) -> u64 {
        int_det_abs(&self.cartan_matrix())
    }

    // ------------------------------------------------------------- trace

    /// Values of the distinguished functional on the basis.
    pub fn trace_values(&self) -> Vec<F> {
        let s = &self.surface;
        self.basis
            .iter()
            .map(|b| match b {
                BasisElement::Central(_) => F::one(),
                BasisElement::Wind { start, steps } => {
                    if let Some((mp, np)) = s.two_special(*start) {
                        if *steps == s.dist(*start, start.rev()) {
                            return s.lambda(mp) * s.lambda(np);
                        }
                    }
                    F::zero()
                }
                _ => F::zero(),
            })
            .collect()
    }

    pub fn gram_matrix(&self) -> Vec<Vec<F>> {
        let tr = self.trace_values();
        let n = self.dim();
        let mut g = vec![vec![F::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if let Some((c, k)) = &self.products[i][j] {
                    g[i][j] = c.clone() * tr[*k].clone();
                }
            }
        }
        g
    }

    /// (trace property holds, Gram matrix nondegenerate)
    pub fn symmetry_report(&self) -> (bool, bool) {
        let tr = self.trace_values();
        let n = self.dim();
        let mut is_trace = true;
        'outer: for i in 0..n {
            for j in 0..n {
                let ij = self.products[i][j]
                    .as_ref()
                    .map(|(c, k)| c.clone() * tr[*k].clone())
                    .unwrap_or_else(F::zero);
                let ji = self.products[j][i]
                    .as_ref()
                    .map(|(c, k)| c.clone() * tr[*k].clone())
                    .unwrap_or_else(F::zero);
                if ij != ji {
                    is_trace = false;
                    break 'outer;
                }
            }
        }
        let nondeg = DenseMatrix::from_rows(self.gram_matrix()).rank() == self.dim();
        (is_trace, nondeg)
    }

    pub fn is_symmetric_algebra(&self) -> bool {
        let (t, n) = self.symmetry_report();
        t && n
    }

    // ------------------------------------------------------- restriction

    /// Translate a basis element supported on the sub-triangulation into the
    /// basis of the restricted surface.
    pub fn translate_basis_to(
        &self,
        sub: &Surface<F>,
        b: BasisElement,
    ) -> Option<BasisElement> {
        let s = &self.surface;
        let name = |e: EdgeIx| &s.edges[e].name;
        match b {
            BasisElement::Idem(u) => sub.edge_index(name(u)).map(BasisElement::Idem),
            BasisElement::Central(u) => sub.edge_index(name(u)).map(BasisElement::Central),
            BasisElement::Wind { start, steps } => {
                let se = sub.edge_index(name(start.edge))?;
                let sub_start = OrientedEdge {
                    edge: se,
                    forward: start.forward,
                };
                // Count the steps that land on surviving positions.
                let (p, i) = s.position(start);
                let rot = s.rotation_at(p);
                let mut sub_steps = 0u64;
                for k in 1..=steps {
                    let oe = rot[(i + k as usize) % rot.len()];
                    let survives = s.is_boundary_edge(oe.edge)
                        || sub.edge_index(name(oe.edge)).is_some();
                    if survives {
                        sub_steps += 1;
                    }
                }
                let tgt = s.target_of(start, steps);
                sub.edge_index(name(tgt.edge))?;
                Some(BasisElement::Wind {
                    start: sub_start,
                    steps: sub_steps,
                })
            }
        }
    }

    /// The corner table e Δ e on the basis elements supported on `keep`,
    /// together with the result of comparing it against the directly-built
    /// table of the restricted surface.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Result<(Vec<usize>, AlgebraTable<F>, bool)> {
        let sub_surface = self.surface.restrict_to(keep)?;
        let sub_table = AlgebraTable::build(&sub_surface)?;
        let mut kept: Vec<usize> = Vec::new();
        let mut map: HashMap<usize, usize> = HashMap::new();
        for (i, b) in self.basis.iter().enumerate() {
            let su = self.surface.edges[self.source(*b)].name.clone();
            let tu = self.surface.edges[self.target(*b)].name.clone();
            if keep.contains(&su) && keep.contains(&tu) {
                if let Some(tb) = self.translate_basis_to(&sub_surface, *b) {
                    if let Some(&ix) = sub_table.index.get(&tb) {
                        kept.push(i);
                        map.insert(i, ix);
                    } else {
                        return Err(Error::Internal(format!(
                            "translated element {tb:?} missing from the restricted basis"
                        )));
                    }
                }
            }
        }
        if kept.len() != sub_table.dim() {
            return Ok((kept, sub_table, false));
        }
        let mut agree = true;
        'outer: for &i in &kept {
            for &j in &kept {
                let lhs = self.products[i][j].clone();
                let rhs = sub_table.products[map[&i]][map[&j]].clone();
                let eq = match (&lhs, &rhs) {
                    (None, None) => true,
                    (Some((c, k)), Some((d, l))) => c == d && map.get(k) == Some(l),
                    _ => false,
                };
                if !eq {
                    agree = false;
                    break 'outer;
                }
            }
        }
        Ok((kept, sub_table, agree))
    }
}

/// |det| of an integer matrix by fraction-free elimination.
pub fn int_det_abs(m: &[Vec<i64>]) -> u64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut denom: i128 = 1;
    let mut sign: i128 = 1;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| a[i][c] != 0) else {
            return 0;
        };
        if p != c {
            a.swap(c, p);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]) / denom;
            }
            a[i][c] = 0;
        }
        denom = a[c][c];
    }
    (sign * a[n - 1][n - 1]).unsigned_abs() as u64
}

// ------------------------------------------------------------------ retag

#[derive(Clone, Debug)]
pub struct RetagReport {
    pub mu_lambdas: Vec<String>,
    pub is_isomorphism: bool,
}

/// The change-of-coefficients isomorphism attached to a bare special
/// monogon: checks that mapping the special arrow a to a - lambda_M e and
/// fixing everything else extends to an isomorphism from the table with
/// mutated coefficients onto the original one.
pub fn retag_isomorphism<F: Field>(
    table: &AlgebraTable<F>,
    side: OrientedEdge,
) -> Result<RetagReport> {
    let s = &table.surface;
    let sl = s
        .special_loop(side)
        .ok_or_else(|| Error::PreconditionFailed("not a special monogon side".into()))?;
    if sl.radius.is_some() {
        return Err(Error::RadiusArcPresent);
    }
    let m = sl.puncture;
    let nu_inv = s
        .nu()
        .inv()
        .ok_or_else(|| Error::Internal("nu not invertible".into()))?;
    let mut mu: Vec<F> = s.points.iter().map(|p| p.lambda.clone()).collect();
    mu[m] = -mu[m].clone();
    let base = s.s(side);
    mu[base] = nu_inv * mu[base].clone();
    let mut mutated = s.clone();
    mutated.set_lambdas(mu.clone());
    let mu_table = AlgebraTable::build(&mutated)?;

    // psi on arrows: identity except the special arrow.
    let special_arrow = Seg {
        start: side,
        steps: 1,
    };
    let lam_m = s.lambda(m);
    let arrow_image = |seg: Seg| -> AlgebraElement<F> {
        // image of a single arrow in the target table
        let mut out = AlgebraElement::new();
        let b = BasisElement::Wind {
            start: seg.start,
            steps: 1,
        };
        let ix = table.index[&b];
        add_into(&mut out, ix, F::one());
        if seg == special_arrow {
            let e = table.index[&BasisElement::Idem(side.edge)];
            add_into(&mut out, e, -lam_m.clone());
        }
        out
    };
    // psi of a basis element: multiply the arrow images of its word.
    let psi_of = |b: BasisElement| -> AlgebraElement<F> {
        match b {
            BasisElement::Idem(u) => [(table.index[&BasisElement::Idem(u)], F::one())]
                .into_iter()
                .collect(),
            BasisElement::Central(u) => {
                // c_u = mu_s * full winding in the source; map the arrows.
                let start = OrientedEdge::fwd(u);
                let p = mutated.s(start);
                let steps = mutated.m(p) * mutated.full_degree(p);
                let mut acc: AlgebraElement<F> =
                    [(table.index[&BasisElement::Idem(u)], F::one())]
                        .into_iter()
                        .collect();
                let (pp, i0) = mutated.position(start);
                let rot = mutated.rotation_at(pp).to_vec();
                for k in 0..steps {
                    let at = rot[(i0 + k as usize) % rot.len()];
                    acc = table.multiply_elements(
                        &acc,
                        &arrow_image(Seg {
                            start: at,
                            steps: 1,
                        }),
                    );
                }
                let mut out = AlgebraElement::new();
                for (ix, c) in acc {
                    add_into(&mut out, ix, c * mu[p].clone());
                }
                out
            }
            BasisElement::Wind { start, steps } => {
                let (pp, i0) = mutated.position(start);
                let rot = mutated.rotation_at(pp).to_vec();
                let mut acc: AlgebraElement<F> =
                    [(table.index[&BasisElement::Idem(start.edge)], F::one())]
                        .into_iter()
                        .collect();
                for k in 0..steps {
                    let at = rot[(i0 + k as usize) % rot.len()];
                    acc = table.multiply_elements(
                        &acc,
                        &arrow_image(Seg {
                            start: at,
                            steps: 1,
                        }),
                    );
                }
                acc
            }
        }
    };

    let n = table.dim();
    let images: Vec<AlgebraElement<F>> = mu_table.basis.iter().map(|&b| psi_of(b)).collect();
    // Linear independence of the images.
    let mut rows = Vec::new();
    for img in &images {
        let mut row = vec![F::zero(); n];
        for (ix, c) in img {
            row[*ix] = c.clone();
        }
        rows.push(row);
    }
    let bijective = DenseMatrix::from_rows(rows).rank() == n;
    // Multiplicativity.
    let mut multiplicative = true;
    'outer: for i in 0..n {
        for j in 0..n {
            let lhs = match &mu_table.products[i][j] {
                None => AlgebraElement::new(),
                Some((c, k)) => {
                    let mut out = AlgebraElement::new();
                    for (ix, x) in &images[*k] {
                        add_into(&mut out, *ix, x.clone() * c.clone());
                    }
                    out
                }
            };
            let rhs = table.multiply_elements(&images[i], &images[j]);
            if lhs != rhs {
                multiplicative = false;
                break 'outer;
            }
        }
    }
    Ok(RetagReport {
        mu_lambdas: mu.iter().map(|x| format!("{x}")).collect(),
        is_isomorphism: bijective && multiplicative,
    })
}

// ----------------------------------------------------------------- oracle

/// Paths of the arc quiver: a source edge plus a list of arrow starts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct QPath {
    src: EdgeIx,
    arrows: Vec<OrientedEdge>,
}

pub struct OracleOutcome<F> {
    pub dimension: usize,
    pub products_match: bool,
    pub details: String,
    _marker: std::marker::PhantomData<F>,
}

struct OracleSpace<F: Field> {
    paths: Vec<QPath>,
    ids: HashMap<QPath, u32>,
    span: SparseSpan<F>,
    max_len: usize,
}

impl<F: Field> OracleSpace<F> {
    fn path_id(&mut self, p: QPath) -> u32 {
        if let Some(&i) = self.ids.get(&p) {
            return i;
        }
        let i = self.paths.len() as u32;
        self.ids.insert(p.clone(), i);
        self.paths.push(p);
        i
    }
}

fn expand_seg<F: Field>(s: &Surface<F>, seg: &Seg) -> Option<Vec<OrientedEdge>> {
    // None when the winding passes a boundary vertex.
    if s.winding_hits_boundary(seg.start, seg.steps) {
        return None;
    }
    let (p, i) = s.position(seg.start);
    let rot = s.rotation_at(p);
    let mut arrows = Vec::with_capacity(seg.steps as usize);
    for k in 0..seg.steps {
        arrows.push(rot[(i + k as usize) % rot.len()]);
    }
    Some(arrows)
}

fn expand_path<F: Field>(s: &Surface<F>, p: &FormalPath) -> Option<(EdgeIx, Vec<OrientedEdge>)> {
    assert_eq!(p.c_factors, 0, "oracle paths carry no central symbols");
    let src = p.segs.first()?.start.edge;
    let mut arrows = Vec::new();
    for seg in &p.segs {
        arrows.extend(expand_seg(s, seg)?);
    }
    Some((src, arrows))
}

/// Independent verification: exact elimination on the span of all quiver
/// paths of length below `l`, modulo the two-sided ideal generated by the
/// expanded relations, with everything of length >= l truncated away.
pub fn brute_force_oracle<F: Field>(
    table: &AlgebraTable<F>,
    l: usize,
) -> Result<OracleOutcome<F>> {
    let s = &table.surface;
    if !s.special_loops().is_empty() {
        return Err(Error::SpecialMonogonPresent);
    }
    let (dim_a, space_a) = oracle_dimension(table, l)?;
    let (dim_b, _space_b) = oracle_dimension(table, l + 2)?;
    if dim_a != dim_b {
        return Err(Error::UnstableTruncation(dim_a, l, dim_b, l + 2));
    }
    // Compare structure constants against the engine inside the length-l
    // model.
    let mut space = space_a;
    let mut ok = dim_a == table.dim();
    let vec_of = |space: &mut OracleSpace<F>, b: BasisElement| -> BTreeMap<u32, F> {
        let (coef, path) = match b {
            BasisElement::Idem(u) => (
                F::one(),
                QPath {
                    src: u,
                    arrows: vec![],
                },
            ),
            BasisElement::Central(u) => {
                let start = OrientedEdge::fwd(u);
                let p = s.s(start);
                let seg = Seg {
                    start,
                    steps: s.m(p) * s.full_degree(p),
                };
                (
                    s.lambda(p),
                    QPath {
                        src: u,
                        arrows: expand_seg(s, &seg).expect("inner central winding"),
                    },
                )
            }
            BasisElement::Wind { start, steps } => (
                F::one(),
                QPath {
                    src: start.edge,
                    arrows: expand_seg(s, &Seg { start, steps }).expect("basis winding"),
                },
            ),
        };
        let id = space.path_id(path);
        [(id, coef)].into_iter().collect()
    };
    let nf = |space: &mut OracleSpace<F>, v: BTreeMap<u32, F>| -> BTreeMap<u32, F> {
        space.span.reduce(v)
    };
    if ok {
        'outer: for i in 0..table.dim() {
            for j in 0..table.dim() {
                let bi = table.basis[i];
                let bj = table.basis[j];
                if table.target(bi) != table.source(bj) {
                    continue;
                }
                // concatenate path words
                let (ci, pi) = match vec_of(&mut space, bi).into_iter().next() {
                    Some((id, c)) => (c, space.paths[id as usize].clone()),
                    None => continue,
                };
                let (cj, pj) = match vec_of(&mut space, bj).into_iter().next() {
                    Some((id, c)) => (c, space.paths[id as usize].clone()),
                    None => continue,
                };
                let mut arrows = pi.arrows.clone();
                arrows.extend(pj.arrows.iter().copied());
                let mut lhs: BTreeMap<u32, F> = BTreeMap::new();
                if arrows.len() < space.max_len {
                    let id = space.path_id(QPath {
                        src: pi.src,
                        arrows,
                    });
                    lhs.insert(id, ci * cj);
                }
                let lhs = nf(&mut space, lhs);
                let rhs = match &table.products[i][j] {
                    None => BTreeMap::new(),
                    Some((c, k)) => {
                        let v = vec_of(&mut space, table.basis[*k]);
                        let scaled: BTreeMap<u32, F> = v
                            .into_iter()
                            .map(|(id, x)| (id, x * c.clone()))
                            .collect();
                        nf(&mut space, scaled)
                    }
                };
                if lhs != rhs {
                    ok = false;
                    break 'outer;
                }
            }
        }
    }
    Ok(OracleOutcome {
        dimension: dim_a,
        products_match: ok,
        details: format!(
            "dimension {dim_a} at truncation {l} (stable at {}), engine dimension {}",
            l + 2,
            table.dim()
        ),
        _marker: std::marker::PhantomData,
    })
}

pub fn default_truncation<F: Field>(s: &Surface<F>) -> usize {
    let max_md = (0..s.points.len())
        .map(|p| s.m(p) * s.arc_degree(p))
        .max()
        .unwrap_or(1);
    2 * (max_md as usize + 2)
}

fn oracle_dimension<F: Field>(
    table: &AlgebraTable<F>,
    l: usize,
) -> Result<(usize, OracleSpace<F>)> {
    let s = &table.surface;
    let mut space = OracleSpace {
        paths: Vec::new(),
        ids: HashMap::new(),
        span: SparseSpan::default(),
        max_len: l,
    };
    // Enumerate all paths of length < l in the arc quiver.
    let arcs = s.arc_indices();
    let mut frontier: Vec<QPath> = arcs
        .iter()
        .map(|&u| QPath {
            src: u,
            arrows: vec![],
        })
        .collect();
    for p in &frontier {
        space.path_id(p.clone());
    }
    for _len in 1..l {
        let mut next = Vec::new();
        for p in &frontier {
            let ends: Vec<OrientedEdge> = if p.arrows.is_empty() {
                let u = p.src;
                vec![OrientedEdge::fwd(u), OrientedEdge::bwd(u)]
            } else {
                let last = *p.arrows.last().unwrap();
                let t = s.succ(last);
                vec![t, t.rev()]
            };
            for start in ends {
                if s.is_boundary_edge(start.edge) {
                    continue;
                }
                let tgt = s.succ(start);
                if s.is_boundary_edge(tgt.edge) {
                    continue;
                }
                let mut arrows = p.arrows.clone();
                arrows.push(start);
                let q = QPath {
                    src: p.src,
                    arrows,
                };
                space.path_id(q.clone());
                next.push(q);
            }
        }
        frontier = next;
    }
    let path_count = space.paths.len();

    // Relation generators as path vectors.
    let mut generators: Vec<BTreeMap<u32, F>> = Vec::new();
    let mut push_comb = |space: &mut OracleSpace<F>, comb: &PathCombination<F>| {
        let mut v: BTreeMap<u32, F> = BTreeMap::new();
        for (c, path) in &comb.terms {
            if let Some((src, arrows)) = expand_path(s, path) {
                if arrows.len() >= l {
                    continue;
                }
                let id = space.path_id(QPath { src, arrows });
                let cur = v.remove(&id).unwrap_or_else(F::zero);
                let nv = cur + c.clone();
                if !nv.is_zero() {
                    v.insert(id, nv);
                }
            }
        }
        if !v.is_empty() {
            generators.push(v);
        }
    };
    let pres = crate::presentation::relations_alt0(s);
    for r in &pres.relations {
        // Expand central tails: e_u C = lambda * the full winding.
        let mut comb = PathCombination::zero();
        for (c, p) in &r.combination.terms {
            if p.c_factors == 0 {
                comb.terms.push((c.clone(), p.clone()));
            } else {
                assert_eq!(p.segs.len(), 1);
                let u = p.segs[0].start.edge;
                if !s.arc_is_inner(u) {
                    continue;
                }
                let start = OrientedEdge::fwd(u);
                let pv = s.s(start);
                comb.terms.push((
                    c.clone() * s.lambda(pv),
                    FormalPath::from_segs(vec![Seg {
                        start,
                        steps: s.m(pv) * s.full_degree(pv),
                    }]),
                ));
            }
        }
        push_comb(&mut space, &comb);
    }
    // J C: arrow times the central winding.
    for (a, b) in crate::presentation::arc_quiver_arrows(s) {
        let u = b.edge;
        if !s.arc_is_inner(u) {
            continue;
        }
        let head = b;
        let pv = s.s(head);
        let comb = PathCombination {
            terms: vec![(
                s.lambda(pv),
                FormalPath::from_segs(vec![
                    Seg { start: a, steps: 1 },
                    Seg {
                        start: head,
                        steps: s.m(pv) * s.full_degree(pv),
                    },
                ]),
            )],
        };
        push_comb(&mut space, &comb);
    }

    // Close the ideal span under one-arrow multiplication on both sides.
    let mut queue: Vec<BTreeMap<u32, F>> = generators;
    while let Some(v) = queue.pop() {
        let v = space.span.reduce(v);
        if v.is_empty() {
            continue;
        }
        // products before inserting: gather path data first
        let items: Vec<(QPath, F)> = v
            .iter()
            .map(|(id, c)| (space.paths[*id as usize].clone(), c.clone()))
            .collect();
        space.span.insert(v);
        // left multiplication
        let mut by_ext: Vec<BTreeMap<u32, F>> = Vec::new();
        let mut exts: BTreeSet<OrientedEdge> = BTreeSet::new();
        for (p, _) in &items {
            let first_vertex = p.src;
            for start in [OrientedEdge::fwd(first_vertex), OrientedEdge::bwd(first_vertex)] {
                // arrow ending at this vertex: its start is the predecessor
                // position around the pivot of `start`
                let prev = s.pred(start);
                if s.is_boundary_edge(prev.edge) {
                    continue;
                }
                exts.insert(prev);
            }
        }
        for prev in exts {
            let mut w: BTreeMap<u32, F> = BTreeMap::new();
            let arrive = s.succ(prev);
            for (p, c) in &items {
                // compose arrow prev -> arrive with p when composable
                if p.src != arrive.edge {
                    continue;
                }
                if 1 + p.arrows.len() >= l {
                    continue;
                }
                let mut arrows = vec![prev];
                arrows.extend(p.arrows.iter().copied());
                let id = space.path_id(QPath {
                    src: prev.edge,
                    arrows,
                });
                let cur = w.remove(&id).unwrap_or_else(F::zero);
                let nv = cur + c.clone();
                if !nv.is_zero() {
                    w.insert(id, nv);
                }
            }
            if !w.is_empty() {
                by_ext.push(w);
            }
        }
        // right multiplication
        let mut rexts: BTreeSet<OrientedEdge> = BTreeSet::new();
        for (p, _) in &items {
            let last_pos: Vec<OrientedEdge> = if p.arrows.is_empty() {
                vec![OrientedEdge::fwd(p.src), OrientedEdge::bwd(p.src)]
            } else {
                let t = s.succ(*p.arrows.last().unwrap());
                vec![t, t.rev()]
            };
            for q in last_pos {
                if !s.is_boundary_edge(q.edge) {
                    rexts.insert(q);
                }
            }
        }
        for q in rexts {
            if s.is_boundary_edge(s.succ(q).edge) {
                continue;
            }
            let mut w: BTreeMap<u32, F> = BTreeMap::new();
            for (p, c) in &items {
                let tail_ok = if p.arrows.is_empty() {
                    p.src == q.edge
                } else {
                    s.succ(*p.arrows.last().unwrap()).edge == q.edge
                };
                if !tail_ok || p.arrows.len() + 1 >= l {
                    continue;
                }
                let mut arrows = p.arrows.clone();
                arrows.push(q);
                let id = space.path_id(QPath {
                    src: p.src,
                    arrows,
                });
                let cur = w.remove(&id).unwrap_or_else(F::zero);
                let nv = cur + c.clone();
                if !nv.is_zero() {
                    w.insert(id, nv);
                }
            }
            if !w.is_empty() {
                by_ext.push(w);
            }
        }
        for w in by_ext {
            let r = space.span.reduce(w);
            if !r.is_empty() {
                queue.push(r);
            }
        }
    }
    let dim = path_count - space.span.rank();
    Ok((dim, space))
}
