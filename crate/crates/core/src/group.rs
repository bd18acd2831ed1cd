//! Exact finite-group arithmetic on multiplication-table presentations.
//!
//! Elements are dense indices `0..order`; symbolic names exist only in file
//! formats. Groups generated from permutations are enumerated breadth-first
//! with the generators first, which fixes every downstream enumeration order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default ceiling on the order of a generated group.
pub const DEFAULT_MAX_ORDER: usize = 2048;

/// Default ceiling for exhaustive automorphism-group search.
pub const DEFAULT_AUT_BOUND: usize = 24;

#[derive(Debug, PartialEq, Eq)]
struct GroupInner {
    order: usize,
    /// Row-major order x order table of element indices.
    mult: Vec<u16>,
    inv: Vec<u16>,
    identity: u16,
}

/// A finite group in multiplication-table form.
///
/// Cheap to clone (shared table). Equality is structural: two groups are
/// equal when their tables coincide.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    inner: Arc<GroupInner>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup(order={})", self.order())
    }
}

impl FiniteGroup {
    /// Build from a full multiplication table. Checks all group axioms;
    /// associativity is verified exhaustively for order <= 64 and via
    /// Light's generator test above that.
    pub fn from_mult_table(table: &[Vec<usize>]) -> Result<FiniteGroup> {
        let n = table.len();
        if n == 0 {
            return Err(Error::NoIdentity);
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimMismatch(format!("row {i} has length {} != {n}", row.len())));
            }
        }
        // Rows and columns must be permutations of 0..n.
        for i in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for j in 0..n {
                let r = table[i][j];
                let c = table[j][i];
                if r >= n || seen_row[r] {
                    return Err(Error::NotPermutation(i));
                }
                if c >= n || seen_col[c] {
                    return Err(Error::NotPermutation(i));
                }
                seen_row[r] = true;
                seen_col[c] = true;
            }
        }
        // Two-sided identity.
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(Error::NoIdentity)?;
        // Two-sided inverses.
        let mut inv = vec![0u16; n];
        for g in 0..n {
            let gi = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or(Error::NoInverse(g))?;
            inv[g] = gi as u16;
        }
        // Associativity.
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if table[table[a][b]][c] != table[a][table[b][c]] {
                            return Err(Error::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            // Light's test: associativity over a generating set of the magma
            // suffices.
            let gens = magma_generating_set(table, identity);
            for &s in &gens {
                for a in 0..n {
                    for b in 0..n {
                        if table[table[a][s]][b] != table[a][table[s][b]] {
                            return Err(Error::NotAssociative(a, s, b));
                        }
                    }
                }
            }
        }
        let mult = table.iter().flat_map(|row| row.iter().map(|&v| v as u16)).collect();
        Ok(FiniteGroup {
            inner: Arc::new(GroupInner { order: n, mult, inv, identity: identity as u16 }),
        })
    }

    /// Build the closure of a list of permutations of `0..degree`, breadth
    /// first with generators first. `max_order` bounds the closure.
    pub fn from_permutations(
        degree: usize,
        gens: &[Vec<usize>],
        max_order: usize,
    ) -> Result<FiniteGroup> {
        Ok(Self::from_permutations_with_elements(degree, gens, max_order)?.0)
    }

    /// Like [`FiniteGroup::from_permutations`], also returning the permutation
    /// realising each element index.
    pub fn from_permutations_with_elements(
        degree: usize,
        gens: &[Vec<usize>],
        max_order: usize,
    ) -> Result<(FiniteGroup, Vec<Vec<usize>>)> {
        for g in gens {
            if g.len() != degree || !is_permutation(g) {
                return Err(Error::NotPermutation(0));
            }
        }
        let identity: Vec<usize> = (0..degree).collect();
        let mut elements: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        // Generators first, deduplicated, in the given order.
        for g in gens {
            if !index.contains_key(g) {
                index.insert(g.clone(), elements.len());
                elements.push(g.clone());
            }
        }
        if elements.is_empty() {
            elements.push(identity.clone());
            index.insert(identity, 0);
        }
        // Breadth-first closure under right multiplication by generators.
        let mut cursor = 0;
        while cursor < elements.len() {
            let current = elements[cursor].clone();
            for g in gens {
                // (current * g)(p) = current(g(p)): apply g first.
                let prod: Vec<usize> = (0..degree).map(|p| current[g[p]]).collect();
                if !index.contains_key(&prod) {
                    if elements.len() >= max_order {
                        return Err(Error::OrderBudget { max: max_order });
                    }
                    index.insert(prod.clone(), elements.len());
                    elements.push(prod);
                }
            }
            cursor += 1;
        }
        let n = elements.len();
        let mut table = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let prod: Vec<usize> = (0..degree).map(|p| elements[a][elements[b][p]]).collect();
                table[a][b] = index[&prod];
            }
        }
        Ok((FiniteGroup::from_mult_table(&table)?, elements))
    }

    pub fn order(&self) -> usize {
        self.inner.order
    }

    pub fn identity(&self) -> usize {
        self.inner.identity as usize
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.inner.mult[a * self.inner.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inner.inv[a] as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.inner.order
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != self.identity() {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn exponent(&self) -> usize {
        self.elements().fold(1usize, |acc, g| num_integer::lcm(acc, self.element_order(g)))
    }

    /// Conjugate h by g: g h g^-1.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    /// Subgroup generated by `seed`, as a sorted element list.
    pub fn closure(&self, seed: &[usize]) -> Vec<usize> {
        let mut members = vec![false; self.order()];
        members[self.identity()] = true;
        let mut queue = vec![self.identity()];
        let mut cursor = 0;
        while cursor < queue.len() {
            let x = queue[cursor];
            cursor += 1;
            for &s in seed {
                let y = self.mul(x, s);
                if !members[y] {
                    members[y] = true;
                    queue.push(y);
                }
            }
        }
        (0..self.order()).filter(|&g| members[g]).collect()
    }

    /// A small generating set, chosen greedily by ascending element index.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens: Vec<usize> = Vec::new();
        let mut sub = self.closure(&[]);
        for g in self.elements() {
            if sub.len() == self.order() {
                break;
            }
            if sub.binary_search(&g).is_err() {
                gens.push(g);
                sub = self.closure(&gens);
            }
        }
        gens
    }

    /// Direct product with row-major element indexing (g, h) -> g*|H| + h.
    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let (n, m) = (self.order(), other.order());
        let mut table = vec![vec![0usize; n * m]; n * m];
        for g1 in 0..n {
            for h1 in 0..m {
                for g2 in 0..n {
                    for h2 in 0..m {
                        table[g1 * m + h1][g2 * m + h2] = self.mul(g1, g2) * m + other.mul(h1, h2);
                    }
                }
            }
        }
        FiniteGroup::from_mult_table(&table).expect("product of groups is a group")
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&v| {
        if v >= seen.len() || seen[v] {
            false
        } else {
            seen[v] = true;
            true
        }
    })
}

/// Generating set of a magma table, greedy closure (for Light's test).
fn magma_generating_set(table: &[Vec<usize>], identity: usize) -> Vec<usize> {
    let n = table.len();
    let close = |seed: &[usize]| -> Vec<bool> {
        let mut members = vec![false; n];
        members[identity] = true;
        let mut queue = vec![identity];
        let mut cursor = 0;
        while cursor < queue.len() {
            let x = queue[cursor];
            cursor += 1;
            for &s in seed {
                let y = table[x][s];
                if !members[y] {
                    members[y] = true;
                    queue.push(y);
                }
            }
        }
        members
    };
    let mut gens = Vec::new();
    let mut covered = close(&[]);
    for g in 0..n {
        if !covered[g] {
            gens.push(g);
            covered = close(&gens);
        }
    }
    gens
}

/// A subgroup, stored as a sorted member list of a parent group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    group: FiniteGroup,
    members: Vec<usize>,
}

impl Subgroup {
    /// Validates closure, identity and inverses.
    pub fn new(group: &FiniteGroup, mut members: Vec<usize>) -> Result<Subgroup> {
        members.sort_unstable();
        members.dedup();
        if members.binary_search(&group.identity()).is_err() {
            return Err(Error::NotSubgroup("missing identity".into()));
        }
        for &a in &members {
            if a >= group.order() {
                return Err(Error::NotSubgroup(format!("index {a} out of range")));
            }
            if members.binary_search(&group.inv(a)).is_err() {
                return Err(Error::NotSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &members {
                if members.binary_search(&group.mul(a, b)).is_err() {
                    return Err(Error::NotSubgroup(format!("product {a}*{b} escapes the subset")));
                }
            }
        }
        Ok(Subgroup { group: group.clone(), members })
    }

    /// Subgroup generated by a seed set.
    pub fn generated(group: &FiniteGroup, seed: &[usize]) -> Subgroup {
        Subgroup { group: group.clone(), members: group.closure(seed) }
    }

    pub fn whole(group: &FiniteGroup) -> Subgroup {
        Subgroup { group: group.clone(), members: group.elements().collect() }
    }

    pub fn trivial(group: &FiniteGroup) -> Subgroup {
        Subgroup { group: group.clone(), members: vec![group.identity()] }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_normal(&self) -> bool {
        self.group
            .elements()
            .all(|g| self.members.iter().all(|&h| self.contains(self.group.conj(g, h))))
    }
}

/// The centre { g : gh = hg for all h }.
pub fn center(group: &FiniteGroup) -> Subgroup {
    let members: Vec<usize> = group
        .elements()
        .filter(|&g| group.elements().all(|h| group.mul(g, h) == group.mul(h, g)))
        .collect();
    Subgroup { group: group.clone(), members }
}

/// The commutator subgroup [G, G].
pub fn commutator_subgroup(group: &FiniteGroup) -> Subgroup {
    let mut comms = Vec::new();
    for g in group.elements() {
        for h in group.elements() {
            // g h g^-1 h^-1
            let c = group.mul(group.conj(g, h), group.inv(h));
            comms.push(c);
        }
    }
    Subgroup::generated(group, &comms)
}

/// A homomorphism between table groups, stored by element images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: FiniteGroup,
    target: FiniteGroup,
    images: Vec<usize>,
}

impl GroupHom {
    pub fn new(source: &FiniteGroup, target: &FiniteGroup, images: Vec<usize>) -> Result<GroupHom> {
        if images.len() != source.order() {
            return Err(Error::DimMismatch("image table length != source order".into()));
        }
        for g in source.elements() {
            for h in source.elements() {
                if images[source.mul(g, h)] != target.mul(images[g], images[h]) {
                    return Err(Error::NotHomomorphism(g, h));
                }
            }
        }
        Ok(GroupHom { source: source.clone(), target: target.clone(), images })
    }

    pub fn identity(group: &FiniteGroup) -> GroupHom {
        GroupHom { source: group.clone(), target: group.clone(), images: group.elements().collect() }
    }

    pub fn source(&self) -> &FiniteGroup {
        &self.source
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    pub fn apply(&self, g: usize) -> usize {
        self.images[g]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.order()];
        for &im in &self.images {
            seen[im] = true;
        }
        seen.iter().all(|&b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.order() == self.target.order() && self.is_surjective()
    }

    pub fn kernel(&self) -> Subgroup {
        let members = self
            .source
            .elements()
            .filter(|&g| self.images[g] == self.target.identity())
            .collect();
        Subgroup { group: self.source.clone(), members }
    }

    /// self after other (self âˆ˜ other).
    pub fn compose(&self, other: &GroupHom) -> Result<GroupHom> {
        if other.target != self.source {
            return Err(Error::GroupDataMismatch);
        }
        let images = other.images.iter().map(|&g| self.images[g]).collect();
        Ok(GroupHom { source: other.source.clone(), target: self.target.clone(), images })
    }
}

/// Abelianization data: the quotient G/[G,G] in invariant-factor form.
#[derive(Debug, Clone)]
pub struct Abelianization {
    /// Invariant factors d_1 | d_2 | ..., all > 1 (empty for perfect groups
    /// and the trivial group).
    pub invariant_factors: Vec<u64>,
    /// Quotient map G -> G/[G,G] (target elements are cosets ordered by
    /// smallest member).
    pub projection: GroupHom,
    /// Coordinates of each element of G in the cyclic decomposition.
    coords: Vec<Vec<u64>>,
}

impl Abelianization {
    /// Coordinates of g in (Z/d_1) x ... x (Z/d_r).
    pub fn coords(&self, g: usize) -> &[u64] {
        &self.coords[g]
    }
}

/// Compute G/[G,G] with invariant factors and the projection map.
pub fn abelianization(group: &FiniteGroup) -> Abelianization {
    let comm = commutator_subgroup(group);
    // Cosets of [G,G], keyed and ordered by smallest member.
    let n = group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut coset_reps: Vec<usize> = Vec::new();
    for g in 0..n {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let id = coset_reps.len();
        coset_reps.push(g);
        for &h in comm.members() {
            coset_of[group.mul(g, h)] = id;
        }
    }
    let q = coset_reps.len();
    let mut table = vec![vec![0usize; q]; q];
    for a in 0..q {
        for b in 0..q {
            table[a][b] = coset_of[group.mul(coset_reps[a], coset_reps[b])];
        }
    }
    let quotient = FiniteGroup::from_mult_table(&table).expect("quotient of a group is a group");
    let projection = GroupHom::new(group, &quotient, coset_of.clone())
        .expect("canonical projection is a homomorphism");

    // Structure of the abelian quotient via the relation lattice of a
    // generating set.
    let gens = quotient.generating_set();
    let r = gens.len();
    if r == 0 {
        return Abelianization {
            invariant_factors: vec![],
            projection,
            coords: vec![vec![]; n],
        };
    }
    // Exponent vectors from a breadth-first scan.
    let mut vecs: Vec<Option<Vec<i64>>> = vec![None; q];
    vecs[quotient.identity()] = Some(vec![0i64; r]);
    let mut queue = vec![quotient.identity()];
    let mut cursor = 0;
    let mut relations: Vec<Vec<i64>> = Vec::new();
    while cursor < queue.len() {
        let x = queue[cursor];
        cursor += 1;
        for (i, &s) in gens.iter().enumerate() {
            let y = quotient.mul(x, s);
            let mut v = vecs[x].clone().unwrap();
            v[i] += 1;
            match &vecs[y] {
                None => {
                    vecs[y] = Some(v);
                    queue.push(y);
                }
                Some(w) => {
                    let rel: Vec<i64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
                    if rel.iter().any(|&c| c != 0) {
                        relations.push(rel);
                    }
                }
            }
        }
    }
    let snf = crate::zmod::Smith::of_columns(r, &relations);
    let factors: Vec<u64> = snf.diagonal().to_vec();
    let mut invariant_factors = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for (i, &d) in factors.iter().enumerate() {
        assert!(d != 0, "quotient of a finite group must be finite");
        if d > 1 {
            invariant_factors.push(d);
            kept.push(i);
        }
    }
    let mut coords = Vec::with_capacity(n);
    for g in 0..n {
        let v = vecs[coset_of[g]].clone().unwrap();
        let full = snf.row_coords(&v);
        coords.push(kept.iter().map(|&i| full[i]).collect());
    }
    Abelianization { invariant_factors, projection, coords }
}

/// A character G -> Z/N, written additively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    modulus: u64,
    values: Vec<u64>,
}

impl Character {
    pub fn new(group: &FiniteGroup, modulus: u64, values: Vec<u64>) -> Result<Character> {
        if values.len() != group.order() {
            return Err(Error::DimMismatch("character table length".into()));
        }
        if values[group.identity()] % modulus.max(1) != 0 {
            return Err(Error::NotHomomorphism(group.identity(), group.identity()));
        }
        for g in group.elements() {
            for h in group.elements() {
                if (values[g] + values[h]) % modulus.max(1) != values[group.mul(g, h)] {
                    return Err(Error::NotHomomorphism(g, h));
                }
            }
        }
        Ok(Character { modulus, values })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn value(&self, g: usize) -> u64 {
        self.values[g]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Pointwise sum (the group law of the character group).
    pub fn add(&self, other: &Character) -> Character {
        assert_eq!(self.modulus, other.modulus, "character modulus mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a + b) % self.modulus.max(1))
            .collect();
        Character { modulus: self.modulus, values }
    }
}

/// All homomorphisms G -> Z/N, enumerated via the abelianization in
/// deterministic lexicographic order. The count is the product of
/// gcd(d_i, N) over the invariant factors.
pub fn characters(group: &FiniteGroup, modulus: u64) -> Vec<Character> {
    let ab = abelianization(group);
    characters_via(group, &ab, modulus)
}

/// Same as [`characters`] but reusing a precomputed abelianization.
pub fn characters_via(group: &FiniteGroup, ab: &Abelianization, modulus: u64) -> Vec<Character> {
    let n = modulus;
    let gcds: Vec<u64> = ab.invariant_factors.iter().map(|&d| num_integer::gcd(d, n)).collect();
    let mut out = Vec::new();
    let mut tuple: Vec<u64> = vec![0; gcds.len()];
    loop {
        let values: Vec<u64> = group
            .elements()
            .map(|g| {
                let coords = ab.coords(g);
                let mut acc: u64 = 0;
                for (i, &c) in coords.iter().enumerate() {
                    if n == 0 {
                        continue;
                    }
                    let step = n / gcds[i];
                    acc = (acc + tuple[i] % n * (step % n) % n * (c % n)) % n.max(1);
                }
                acc % n.max(1)
            })
            .collect();
        out.push(Character { modulus: n, values });
        // Lexicographic increment.
        let mut i = gcds.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < gcds[i] {
                break;
            }
            tuple[i] = 0;
            if i == 0 {
                return out;
            }
        }
    }
}

/// Representatives of the right cosets Hg, one per class, each class
/// represented by its smallest element. The identity ranks before every
/// other index, so the coset H itself is always represented by the identity
/// (for table-built groups the identity is index 0 and this is plain
/// ascending order).
pub fn right_cosets(sub: &Subgroup) -> Vec<usize> {
    let group = sub.group();
    let mut covered = vec![false; group.order()];
    let mut reps = Vec::new();
    let order: Vec<usize> = std::iter::once(group.identity())
        .chain(group.elements().filter(|&g| g != group.identity()))
        .collect();
    for g in order {
        if covered[g] {
            continue;
        }
        reps.push(g);
        for &h in sub.members() {
            covered[group.mul(h, g)] = true;
        }
    }
    reps
}

/// All automorphisms of G by exhaustive generator-image search.
/// Errors if the order exceeds `bound`.
pub fn automorphism_group(group: &FiniteGroup, bound: usize) -> Result<Vec<GroupHom>> {
    if group.order() > bound {
        return Err(Error::Budget(format!(
            "automorphism search bounded at order {bound}, group has order {}",
            group.order()
        )));
    }
    let gens = group.generating_set();
    if gens.is_empty() {
        return Ok(vec![GroupHom::identity(group)]);
    }
    let orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();
    let mut found = Vec::new();
    let mut images = vec![0usize; gens.len()];
    search_automorphisms(group, &gens, &orders, 0, &mut images, &mut found);
    Ok(found)
}

fn search_automorphisms(
    group: &FiniteGroup,
    gens: &[usize],
    orders: &[usize],
    depth: usize,
    images: &mut Vec<usize>,
    found: &mut Vec<GroupHom>,
) {
    if depth == gens.len() {
        if let Some(hom) = hom_from_generator_images(group, group, gens, images) {
            if hom.is_bijective() {
                found.push(hom);
            }
        }
        return;
    }
    for candidate in group.elements() {
        if group.element_order(candidate) != orders[depth] {
            continue;
        }
        images[depth] = candidate;
        search_automorphisms(group, gens, orders, depth + 1, images, found);
    }
}

/// Try to extend generator images to a homomorphism G -> H by following the
/// breadth-first closure; returns None on any inconsistency.
pub fn hom_from_generator_images(
    source: &FiniteGroup,
    target: &FiniteGroup,
    gens: &[usize],
    gen_images: &[usize],
) -> Option<GroupHom> {
    let n = source.order();
    let mut image = vec![usize::MAX; n];
    image[source.identity()] = target.identity();
    let mut queue = vec![source.identity()];
    let mut cursor = 0;
    while cursor < queue.len() {
        let x = queue[cursor];
        cursor += 1;
        for (i, &s) in gens.iter().enumerate() {
            let y = source.mul(x, s);
            let im = target.mul(image[x], gen_images[i]);
            if image[y] == usize::MAX {
                image[y] = im;
                queue.push(y);
            } else if image[y] != im {
                return None;
            }
        }
    }
    if image.iter().any(|&v| v == usize::MAX) {
        return None;
    }
    // Full verification: the closure construction guarantees consistency on
    // tree words only.
    GroupHom::new(source, target, image).ok()
}

// ---------------------------------------------------------------------------
// Named constructors for common groups.
// ---------------------------------------------------------------------------

pub fn trivial_group() -> FiniteGroup {
    FiniteGroup::from_mult_table(&[vec![0]]).unwrap()
}

pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroup::from_mult_table(&table).unwrap()
}

/// Dihedral group keyed by its ORDER (must be even >= 2); the rotation
/// subgroup has order `order/2`.
pub fn dihedral(order: usize) -> FiniteGroup {
    assert!(order >= 2 && order % 2 == 0, "dihedral groups have even order");
    let m = order / 2;
    if m == 1 {
        return cyclic(2);
    }
    // Acting on m vertices: rotation and reflection.
    let rot: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
    let refl: Vec<usize> = (0..m).map(|i| (m - i) % m).collect();
    FiniteGroup::from_permutations(m, &[rot, refl], order.max(16)).unwrap()
}

/// Symmetric group on n letters, generated by a transposition and an n-cycle.
pub fn symmetric(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    if n == 1 {
        return trivial_group();
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (1..n).chain(std::iter::once(0)).collect();
    let mut fact = 1usize;
    for k in 2..=n {
        fact *= k;
    }
    FiniteGroup::from_permutations(n, &[swap, cycle], fact).unwrap()
}

/// The quaternion group of order 8: {1, -1, i, -i, j, -j, k, -k}.
pub fn quaternion8() -> FiniteGroup {
    // Encode q = (sign, axis) with axis in {1, i, j, k} as index axis*2 + (sign<0).
    // Multiplication via the quaternion relations.
    fn mul_q(a: usize, b: usize) -> usize {
        let (sa, xa) = (a % 2 == 1, a / 2);
        let (sb, xb) = (b % 2 == 1, b / 2);
        // table over axes {0:1, 1:i, 2:j, 3:k}: (axis, sign)
        const AXIS: [[usize; 4]; 4] = [
            [0, 1, 2, 3],
            [1, 0, 3, 2],
            [2, 3, 0, 1],
            [3, 2, 1, 0],
        ];
        const SIGN: [[bool; 4]; 4] = [
            [false, false, false, false],
            [false, true, false, true],
            [false, true, true, false],
            [false, false, true, true],
        ];
        // SIGN[a][b] is the sign of axis_a * axis_b: i*i = -1, i*j = k, j*i = -k, ...
        let axis = AXIS[xa][xb];
        let sign = sa ^ sb ^ SIGN[xa][xb];
        axis * 2 + sign as usize
    }
    let table: Vec<Vec<usize>> = (0..8).map(|a| (0..8).map(|b| mul_q(a, b)).collect()).collect();
    FiniteGroup::from_mult_table(&table).unwrap()
}

/// (Z/n)^k as a direct product.
pub fn elementary_product(n: usize, k: usize) -> FiniteGroup {
    let mut g = trivial_group();
    for _ in 0..k {
        g = g.direct_product(&cyclic(n));
    }
    g
}

/// Embedding of G into G x G along the diagonal.
pub fn diagonal_embedding(group: &FiniteGroup, square: &FiniteGroup) -> GroupHom {
    let n = group.order();
    assert_eq!(square.order(), n * n, "target must be G x G");
    let images = group.elements().map(|g| g * n + g).collect();
    GroupHom::new(group, square, images).expect("diagonal embedding is a homomorphism")
}

/// The diagonal subgroup of G x G.
pub fn diagonal_subgroup(group: &FiniteGroup, square: &FiniteGroup) -> Subgroup {
    let n = group.order();
    let members: Vec<usize> = group.elements().map(|g| g * n + g).collect();
    Subgroup::new(square, members).expect("diagonal is a subgroup")
}

/// Projection G x H -> G (first factor).
pub fn product_proj1(product: &FiniteGroup, g: &FiniteGroup, h: &FiniteGroup) -> GroupHom {
    let m = h.order();
    let images = (0..product.order()).map(|x| x / m).collect();
    GroupHom::new(product, g, images).expect("projection is a homomorphism")
}

/// Projection G x H -> H (second factor).
pub fn product_proj2(product: &FiniteGroup, _g: &FiniteGroup, h: &FiniteGroup) -> GroupHom {
    let m = h.order();
    let images = (0..product.order()).map(|x| x % m).collect();
    GroupHom::new(product, h, images).expect("projection is a homomorphism")
}
