//! Spectral-α-codes: the combinatorial tree indexing the bands of all
//! periodic approximants at once, its exact counting matrices, the
//! μ-coefficients, and the geometric realization `b_V` for `V > 4`.
//!
//! A code `γ = (γ(0), …, γ(k))` is measured against the entries `c_1, …, c_k`
//! of a continued fraction; `γ(j+1)` is drawn from the children of `γ(j)`
//! under `c_{j+1}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cf::{convergents, CfWord};
use crate::error::{Error, Result};
use crate::spectra::{tolerance, Band, BandType, Spectra};

/// Hard cap on the number of codes materialized by [`enumerate_codes`].
pub const MAX_CODES: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    A(u64),
    G(u64),
    B,
}

/// Letter classes used by the counting matrices, in the basis order `(G, B, A)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    G,
    B,
    A,
}

impl Letter {
    /// Position in `G1 ⋖ A1 ⋖ G2 ⋖ A2 ⋖ …`; `B` is always an only child.
    pub fn rank(self) -> u64 {
        match self {
            Letter::G(i) => 2 * i - 1,
            Letter::A(i) => 2 * i,
            Letter::B => 0,
        }
    }

    pub fn label(self) -> Label {
        match self {
            Letter::A(_) => Label::A,
            Letter::G(_) => Label::G,
            Letter::B => Label::B,
        }
    }

    pub fn is_a(self) -> bool {
        matches!(self, Letter::A(_))
    }

    pub fn is_g(self) -> bool {
        matches!(self, Letter::G(_))
    }

    /// Spectral letters end codes that index bands of `σ_{c_k}`.
    pub fn is_spectral(self) -> bool {
        !self.is_g()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::A(i) => write!(f, "A{i}"),
            Letter::G(i) => write!(f, "G{i}"),
            Letter::B => f.write_str("B"),
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCode(format!("bad letter {s:?}"));
        let s = s.trim();
        if s == "B" {
            return Ok(Letter::B);
        }
        let (head, idx) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let i: u64 = idx.parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        match head {
            "A" => Ok(Letter::A(i)),
            "G" => Ok(Letter::G(i)),
            _ => Err(bad()),
        }
    }
}

/// Children of `prev` under the entry `c`, in `⋖` order; `None` is the root.
pub fn children(prev: Option<Letter>, c: u64) -> Vec<Letter> {
    let mut out = Vec::new();
    match prev {
        None => return vec![Letter::A(1), Letter::G(2)],
        Some(Letter::G(_)) => return vec![Letter::B],
        Some(Letter::A(_)) => {
            for i in 1..=c {
                out.push(Letter::G(i));
                if i < c {
                    out.push(Letter::A(i));
                }
            }
        }
        Some(Letter::B) => {
            for i in 1..=c {
                out.push(Letter::G(i));
                out.push(Letter::A(i));
            }
            out.push(Letter::G(c + 1));
        }
    }
    out
}

/// A finite code `(γ(0), …, γ(k))`, written `A1.G2.B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Code {
    letters: Vec<Letter>,
}

impl Code {
    pub fn new(letters: Vec<Letter>) -> Self {
        Code { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Depth `k` of a code of length `k+1`.
    pub fn depth(&self) -> usize {
        self.letters.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn at(&self, j: usize) -> Letter {
        self.letters[j]
    }

    /// `γ|[0,j]`.
    pub fn prefix(&self, j: usize) -> Code {
        Code { letters: self.letters[..=j].to_vec() }
    }

    pub fn push(&mut self, l: Letter) {
        self.letters.push(l);
    }

    pub fn is_spectral(&self) -> bool {
        self.last().is_some_and(Letter::is_spectral)
    }

    /// Checks (Σ1)–(Σ4) against `c_1, …, c_k`.
    pub fn validate(&self, entries: &[u64]) -> Result<()> {
        if self.letters.is_empty() {
            return Err(Error::InvalidCode("empty code".into()));
        }
        if self.depth() > entries.len() {
            return Err(Error::InvalidCode(format!("{self} is deeper than the {} entries given", entries.len())));
        }
        let mut prev = None;
        for (j, &l) in self.letters.iter().enumerate() {
            let c = if j == 0 { 0 } else { entries[j - 1] };
            if !children(prev, c).contains(&l) {
                return Err(Error::InvalidCode(format!("{self}: letter {l} not allowed at position {j}")));
            }
            prev = Some(l);
        }
        Ok(())
    }

    /// `⋖` for codes of equal length: lexicographic in the letter ranks.
    pub fn cmp_order(&self, other: &Code) -> Ordering {
        for (a, b) in self.letters.iter().zip(&other.letters) {
            match a.rank().cmp(&b.rank()) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.len().cmp(&other.len())
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for Code {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s.split('.').map(str::parse).collect::<Result<Vec<Letter>>>()?;
        Ok(Code { letters })
    }
}

/// All codes of length `k+1` for `c_1, …, c_k`, in `⋖` order.
pub fn enumerate_codes(entries: &[u64], spectral_only: bool) -> Result<Vec<Code>> {
    fn walk(entries: &[u64], cur: &mut Vec<Letter>, spectral_only: bool, out: &mut Vec<Code>) -> Result<()> {
        let j = cur.len();
        if j == entries.len() + 1 {
            if !spectral_only || cur.last().is_some_and(|l| l.is_spectral()) {
                if out.len() as u64 >= MAX_CODES {
                    return Err(Error::TooManyCodes(MAX_CODES));
                }
                out.push(Code { letters: cur.clone() });
            }
            return Ok(());
        }
        let c = if j == 0 { 0 } else { entries[j - 1] };
        for l in children(cur.last().copied(), c) {
            cur.push(l);
            walk(entries, cur, spectral_only, out)?;
            cur.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(entries, &mut Vec::new(), spectral_only, &mut out)?;
    Ok(out)
}

/// Counts `(G, B, A)` of the descendants of a letter, one level per entry,
/// by walking every code.
pub fn count_descendants(last: Letter, entries: &[u64]) -> [u64; 3] {
    fn walk(l: Letter, entries: &[u64], acc: &mut [u64; 3]) {
        match entries.split_first() {
            None => match l.label() {
                Label::G => acc[0] += 1,
                Label::B => acc[1] += 1,
                Label::A => acc[2] += 1,
            },
            Some((&c, rest)) => {
                for ch in children(Some(l), c) {
                    walk(ch, rest, acc);
                }
            }
        }
    }
    let mut acc = [0; 3];
    walk(last, entries, &mut acc);
    acc
}

/// A 3×3 integer matrix in the basis `(G, B, A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix(pub [[BigInt; 3]; 3]);

impl CountMatrix {
    pub fn from_i64(m: [[i64; 3]; 3]) -> Self {
        CountMatrix(m.map(|r| r.map(BigInt::from)))
    }

    pub fn identity() -> Self {
        Self::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn mul(&self, o: &CountMatrix) -> CountMatrix {
        let mut out = Self::from_i64([[0; 3]; 3]);
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|l| &self.0[i][l] * &o.0[l][j]).sum();
            }
        }
        out
    }

    pub fn apply(&self, v: &[BigInt; 3]) -> [BigInt; 3] {
        std::array::from_fn(|i| (0..3).map(|l| &self.0[i][l] * &v[l]).sum())
    }

    pub fn scale(&self, s: &BigInt) -> CountMatrix {
        CountMatrix(self.0.clone().map(|r| r.map(|x| x * s)))
    }

    pub fn det(&self) -> BigInt {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.0[i][j]
    }
}

impl fmt::Display for CountMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.0.iter().map(|r| format!("({},{},{})", r[0], r[1], r[2])).collect();
        write!(f, "({})", rows.join(","))
    }
}

/// One-level counting matrix for the entry `c`.
pub fn counting_matrix_t(c: u64) -> CountMatrix {
    let c = c as i64;
    CountMatrix::from_i64([[0, c + 1, c], [1, 0, 0], [0, c, c - 1]])
}

/// `S_k = T_k ⋯ T_1` as a product.
pub fn s_product(entries: &[u64]) -> CountMatrix {
    entries.iter().fold(CountMatrix::identity(), |s, &c| counting_matrix_t(c).mul(&s))
}

fn pq(entries: &[u64], k: usize) -> [BigInt; 4] {
    let conv = convergents(entries, k);
    let (pk, qk) = conv[k + 1].clone();
    let (pk1, qk1) = conv[k].clone();
    [pk, qk, pk1, qk1]
}

/// `S_k` from the convergents.
pub fn s_closed(entries: &[u64]) -> CountMatrix {
    let k = entries.len();
    let [p, q, p1, q1] = pq(entries, k);
    let s = BigInt::from(if k % 2 == 0 { 1 } else { -1 });
    CountMatrix([
        [&p + &s, &q - &s, &q - &p - &s],
        [&p1 - &s, &q1 + &s, &q1 - &p1 + &s],
        [&p - &p1 + &s, &q - &q1 - &s, &q - &q1 - &p + &p1 - &s],
    ])
}

/// `S_k^{-1}` from the convergents.
pub fn s_inverse_closed(entries: &[u64]) -> CountMatrix {
    let k = entries.len();
    let [p, q, p1, q1] = pq(entries, k);
    let one = BigInt::one();
    let s = BigInt::from(if k % 2 == 0 { 1 } else { -1 });
    CountMatrix([
        [&one - &p, &p1 - &one, &p1 + &p - &one],
        [&q - &one, &one - &q1, &one - &q - &q1],
        [&one - &p - &q, &q1 + &p1 - &one, &p + &p1 + &q + &q1 - &one],
    ])
    .scale(&s)
}

/// `S_k` and `S_k^{-1}`, after checking the product against the closed forms.
pub fn cumulative_s(entries: &[u64]) -> Result<(CountMatrix, CountMatrix)> {
    let prod = s_product(entries);
    let closed = s_closed(entries);
    if prod != closed {
        return Err(Error::RouteMismatch(format!("S_{}: product {prod} vs closed form {closed}", entries.len())));
    }
    let inv = s_inverse_closed(entries);
    if prod.mul(&inv) != CountMatrix::identity() {
        return Err(Error::RouteMismatch(format!("S_{} times its closed inverse is not the identity", entries.len())));
    }
    Ok((prod, inv))
}

/// `d_j^k(label) = (0 1 1) S_k S_j^{-1} e_label` for `c_1, …, c_k`.
pub fn extension_count(entries: &[u64], j: usize, label: Label) -> Result<BigInt> {
    let k = entries.len();
    if j > k {
        return Err(Error::InvalidCode(format!("j = {j} exceeds k = {k}")));
    }
    let (sk, _) = cumulative_s(entries)?;
    let (_, sj_inv) = cumulative_s(&entries[..j])?;
    let e = match label {
        Label::G => [1, 0, 0],
        Label::B => [0, 1, 0],
        Label::A => [0, 0, 1],
    }
    .map(BigInt::from);
    let v = sk.mul(&sj_inv).apply(&e);
    Ok(&v[1] + &v[2])
}

/// `d_j^k(label)` by walking the extensions of one prefix ending in `label`;
/// `None` when no such prefix exists at level `j`.
pub fn extension_count_brute(entries: &[u64], j: usize, label: Label) -> Option<u64> {
    fn find(entries: &[u64], prev: Option<Letter>, depth: usize, label: Label) -> Option<Letter> {
        let c = prev.map_or(0, |_| entries[0]);
        let rest = if prev.is_some() { &entries[1..] } else { entries };
        children(prev, c).into_iter().find_map(|l| {
            if depth == 0 {
                (l.label() == label).then_some(l)
            } else {
                find(rest, Some(l), depth - 1, label)
            }
        })
    }
    let last = find(&entries[..j], None, j, label)?;
    let n = count_descendants(last, &entries[j..]);
    Some(n[1] + n[2])
}

/// `𝒫_j^k = (−1)^j (q_j p_k − p_j q_k)` for `−1 ≤ j ≤ k`, with `conv[i]`
/// holding `(p_{i−1}, q_{i−1})`.
pub fn p_coeff(j: i64, k: i64, conv: &[(BigInt, BigInt)]) -> BigInt {
    assert!(-1 <= j && j <= k);
    let (pj, qj) = &conv[(j + 1) as usize];
    let (pk, qk) = &conv[(k + 1) as usize];
    let v = qj * pk - pj * qk;
    if j.rem_euclid(2) == 0 {
        v
    } else {
        -v
    }
}

/// `(#Γ_j(γ, A), #Γ_j(γ, G))`: siblings of `γ(j)` strictly `⋖`-before it.
pub fn gamma_counts(code: &Code, entries: &[u64], j: usize) -> Result<(u64, u64)> {
    let prev = if j == 0 { None } else { Some(code.at(j - 1)) };
    let c = if j == 0 { 0 } else { entries[j - 1] };
    let sibs = children(prev, c);
    let pos = sibs.iter().position(|&l| l == code.at(j)).ok_or_else(|| Error::InvalidCode(code.to_string()))?;
    let a = sibs[..pos].iter().filter(|l| l.is_a()).count() as u64;
    let g = sibs[..pos].iter().filter(|l| l.is_g()).count() as u64;
    Ok((a, g))
}

/// μ-coefficients indexed from `−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MuSeq {
    mu: Vec<i64>,
}

impl MuSeq {
    /// From `(μ_{−1}, μ_0, μ_1, …)`.
    pub fn new(mu: Vec<i64>) -> Self {
        MuSeq { mu }
    }

    pub fn values(&self) -> &[i64] {
        &self.mu
    }

    /// `μ_k`, zero past the stored prefix.
    pub fn get(&self, k: i64) -> i64 {
        self.mu.get((k + 1) as usize).copied().unwrap_or(0)
    }

    /// Largest stored index.
    pub fn last_index(&self) -> i64 {
        self.mu.len() as i64 - 2
    }

    /// Index of the last non-zero coefficient.
    pub fn support_end(&self) -> Option<i64> {
        self.mu.iter().rposition(|&x| x != 0).map(|i| i as i64 - 1)
    }

    /// Pads or truncates to indices `−1 ..= k`.
    pub fn resized(&self, k: i64) -> MuSeq {
        let mut mu = self.mu.clone();
        mu.resize((k + 2) as usize, 0);
        MuSeq { mu }
    }

    /// Checks the range constraints against `c_1, c_2, …`.
    pub fn validate(&self, entries: &[u64]) -> Result<()> {
        let bad = |why: String| Err(Error::InvalidMu(format!("{self}: {why}")));
        let m = |k: i64| self.get(k);
        if !(0..=1).contains(&m(-1)) {
            return bad("μ_-1 must be 0 or 1".into());
        }
        if self.mu.len() >= 2 && (m(-1) == 1) != (m(0) == -1) {
            return bad("μ_-1 = 1 exactly when μ_0 = -1".into());
        }
        for k in 0..=self.last_index() {
            let c = *entries.get(k as usize).ok_or_else(|| Error::InsufficientDepth(format!("μ_{k} needs c_{}", k + 1)))? as i64;
            let (lo, hi) = if k == 0 { (-1, c - 1) } else { (0, c) };
            if !(lo..=hi).contains(&m(k)) {
                return bad(format!("μ_{k} outside [{lo}, {hi}]"));
            }
            if m(k) == hi && k < self.last_index() && m(k + 1) != 0 {
                return bad(format!("μ_{k} is maximal but μ_{} is not zero", k + 1));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MuSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mu.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `μ_{−1}, …, μ_{k−1}` of a code of length `k+1`, by counting the sets
/// `Γ_j` and cross-checked against the closed form
/// `μ_j = δ_A(j) + #Γ_{j+1}(A) − δ_{j,0}`.
pub fn mu_of_code(code: &Code, entries: &[u64]) -> Result<MuSeq> {
    code.validate(entries)?;
    let k = code.depth();
    let gam: Vec<(u64, u64)> = (0..=k).map(|j| gamma_counts(code, entries, j)).collect::<Result<_>>()?;
    let mut mu = vec![gam[0].0 as i64];
    for j in 0..k {
        mu.push(gam[j].1 as i64 - gam[j].0 as i64 + gam[j + 1].0 as i64);
    }
    let mut table = vec![if code.at(0) == Letter::G(2) { 1 } else { 0 }];
    for j in 0..k {
        let next_a = match code.at(j + 1) {
            Letter::A(i) | Letter::G(i) => i as i64 - 1,
            Letter::B => 0,
        };
        table.push(code.at(j).is_a() as i64 + next_a - (j == 0) as i64);
    }
    if mu != table {
        return Err(Error::RouteMismatch(format!("{code}: μ by counting {mu:?}, by table {table:?}")));
    }
    Ok(MuSeq { mu })
}

/// The code of length `k+1` determined by `μ_{−1}, …, μ_k`.
pub fn code_of_mu(mu: &MuSeq, entries: &[u64]) -> Result<Code> {
    let k = mu.last_index();
    if k < 0 {
        return Err(Error::InvalidMu(format!("{mu}: needs μ_-1 and μ_0")));
    }
    mu.validate(entries)?;
    let mut code = Code::new(vec![if mu.get(-1) == 1 { Letter::G(2) } else { Letter::A(1) }]);
    for j in 0..k {
        let cur = code.at(j as usize);
        let next = if cur.is_g() {
            if mu.get(j) != -((j == 0) as i64) {
                return Err(Error::InvalidMu(format!("{mu}: μ_{j} after a G letter")));
            }
            Letter::B
        } else {
            let i = mu.get(j) - cur.is_a() as i64 + (j == 0) as i64 + 1;
            if i < 1 {
                return Err(Error::InvalidMu(format!("{mu}: μ_{j} too small")));
            }
            if mu.get(j + 1) == 0 {
                Letter::G(i as u64)
            } else {
                Letter::A(i as u64)
            }
        };
        if !children(Some(cur), entries[j as usize]).contains(&next) {
            return Err(Error::InvalidMu(format!("{mu}: letter {next} not allowed at position {}", j + 1)));
        }
        code.push(next);
    }
    Ok(code)
}

/// Number of spectral codes of depth `k` strictly `⋖`-below `γ|[0,k]`, with
/// the per-level counts `#D_j^k(γ)`.
pub fn left_count(code: &Code, entries: &[u64], k: usize) -> Result<(BigInt, Vec<BigInt>)> {
    if code.depth() < k || entries.len() < k {
        return Err(Error::InvalidCode(format!("{code} is shorter than depth {k}")));
    }
    code.prefix(k).validate(entries)?;
    let ent = &entries[..k];
    let mut per = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let (a, g) = gamma_counts(code, ent, j)?;
        let da = extension_count(ent, j, Label::A)?;
        let dg = extension_count(ent, j, Label::G)?;
        per.push(da * a + dg * g);
    }
    Ok((per.iter().sum(), per))
}

/// [`left_count`] by enumerating every spectral code of depth `k`.
pub fn left_count_brute(code: &Code, entries: &[u64], k: usize) -> Result<u64> {
    let target = code.prefix(k);
    Ok(enumerate_codes(&entries[..k], true)?.iter().filter(|e| e.cmp_order(&target) == Ordering::Less).count() as u64)
}

/// Level bands `L_{c,V}`: typed bands of `σ_c` and type-B bands of `σ_{[c,1]}`,
/// sorted left to right.
pub fn level_bands(spectra: &mut Spectra, c: &CfWord) -> Result<Vec<Band>> {
    let mut bands = spectra.typed_bands(c)?;
    bands.extend(spectra.typed_bands(&c.extend(1)?)?.into_iter().filter(|b| b.btype == BandType::B));
    bands.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    for w in bands.windows(2) {
        let gap = w[0].separation(&w[1]);
        if gap <= tolerance(w[0].hi_f64()) {
            return Err(Error::StructureViolation(format!(
                "level {c}: band {} of {} and band {} of {} are {gap:e} apart",
                w[0].index, w[0].owner, w[1].index, w[1].owner
            )));
        }
    }
    Ok(bands)
}

/// One vertex of the realized code tree.
#[derive(Clone, Debug)]
pub struct Node {
    pub code: Code,
    pub band: Band,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// `b_V` on all codes up to a depth, built level by level: each level band
/// hangs below the level band of the previous depth containing it (possibly
/// equal to it), and the
/// siblings, sorted left to right, receive the children letters in `⋖` order.
#[derive(Clone, Debug)]
pub struct CodeTree {
    entries: Vec<u64>,
    levels: Vec<Vec<Node>>,
}

impl CodeTree {
    pub fn build(spectra: &mut Spectra, entries: &[u64], depth: usize) -> Result<CodeTree> {
        if entries.len() < depth {
            return Err(Error::InsufficientDepth(format!("depth {depth} needs {depth} entries")));
        }
        let word = |k: usize| CfWord::from_tail(&entries[..k].iter().map(|&c| c as i64).collect::<Vec<_>>());
        let fail = |why: String| Error::StructureViolation(why);
        let mut levels: Vec<Vec<Node>> = Vec::with_capacity(depth + 1);
        for k in 0..=depth {
            let ck = word(k)?;
            let bands = level_bands(spectra, &ck)?;
            let mut nodes: Vec<Node> =
                bands.into_iter().map(|band| Node { code: Code::default(), band, parent: None, children: Vec::new() }).collect();
            if k == 0 {
                let letters = children(None, 0);
                if nodes.len() != letters.len() {
                    return Err(fail(format!("level 0 has {} bands", nodes.len())));
                }
                for (n, l) in nodes.iter_mut().zip(letters) {
                    n.code = Code::new(vec![l]);
                }
            } else {
                let prev = &mut levels[k - 1];
                for (i, n) in nodes.iter_mut().enumerate() {
                    let at = prev.partition_point(|p| p.band.lo <= n.band.lo);
                    let host = at.checked_sub(1).filter(|&h| n.band.inclusion_margin(&prev[h].band) >= -tolerance(n.band.hi_f64()));
                    let h = host.ok_or_else(|| {
                        fail(format!("band {} of {} at level {k} has no host at level {}", n.band.index, n.band.owner, k - 1))
                    })?;
                    n.parent = Some(h);
                    prev[h].children.push(i);
                }
                for p in prev.iter() {
                    let letters = children(p.code.last(), entries[k - 1]);
                    if letters.len() != p.children.len() {
                        return Err(fail(format!(
                            "{} has {} children bands, expected {}",
                            p.code,
                            p.children.len(),
                            letters.len()
                        )));
                    }
                    for (&ci, l) in p.children.iter().zip(letters) {
                        let mut code = p.code.clone();
                        code.push(l);
                        nodes[ci].code = code;
                    }
                }
            }
            for n in &nodes {
                let l = n.code.last().expect("non-empty");
                let ok = match l {
                    Letter::A(_) => n.band.owner == ck && n.band.btype == BandType::A,
                    Letter::B => n.band.owner == ck && n.band.btype == BandType::B,
                    Letter::G(_) => n.band.owner != ck,
                };
                if !ok {
                    return Err(fail(format!("{} landed on a {} band of {}", n.code, n.band.btype, n.band.owner)));
                }
            }
            levels.push(nodes);
        }
        Ok(CodeTree { entries: entries[..depth].to_vec(), levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn level(&self, k: usize) -> &[Node] {
        &self.levels[k]
    }

    /// The node of a code, following its letters from the root.
    pub fn find(&self, code: &Code) -> Result<&Node> {
        if code.is_empty() || code.depth() > self.depth() {
            return Err(Error::InvalidCode(format!("{code} is outside a tree of depth {}", self.depth())));
        }
        let mut idx = self.levels[0]
            .iter()
            .position(|n| n.code.at(0) == code.at(0))
            .ok_or_else(|| Error::InvalidCode(code.to_string()))?;
        for k in 1..code.len() {
            idx = *self.levels[k - 1][idx]
                .children
                .iter()
                .find(|&&c| self.levels[k][c].code.at(k) == code.at(k))
                .ok_or_else(|| Error::InvalidCode(code.to_string()))?;
        }
        Ok(&self.levels[code.depth()][idx])
    }

    /// `b_V(γ)`.
    pub fn band_of(&self, code: &Code) -> Result<&Band> {
        Ok(&self.find(code)?.band)
    }
}

/// `b_V(γ)` for a single code.
pub fn code_to_band(code: &Code, entries: &[u64], v: f64) -> Result<Band> {
    code.validate(entries)?;
    let tree = CodeTree::build(&mut Spectra::new(v), entries, code.depth())?;
    tree.band_of(code).cloned()
}

/// Number of codes of length `k+1`, from `S_k`, split as `(G, B, A)`.
pub fn level_sizes(entries: &[u64]) -> [u64; 3] {
    let s = s_product(entries);
    let start = [BigInt::one(), BigInt::zero(), BigInt::one()];
    let v = s.apply(&start);
    v.map(|x| x.abs().to_u64().unwrap_or(u64::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> Code {
        s.parse().unwrap()
    }

    #[test]
    fn text_form() {
        let c = code("A1.G2.B");
        assert_eq!(c.letters(), &[Letter::A(1), Letter::G(2), Letter::B]);
        assert_eq!(c.to_string(), "A1.G2.B");
        assert!("A0".parse::<Code>().is_err());
        assert!("X1".parse::<Code>().is_err());
    }

    #[test]
    fn enumeration_examples() {
        let z = enumerate_codes(&[], false).unwrap();
        assert_eq!(z, vec![code("A1"), code("G2")]);
        assert_eq!(enumerate_codes(&[2], true).unwrap().len(), 2);
        assert_eq!(enumerate_codes(&[2, 1, 1, 2], true).unwrap().len(), 13);
        let all = enumerate_codes(&[2, 1, 1, 2], false).unwrap();
        assert!(all.windows(2).all(|w| w[0].cmp_order(&w[1]) == Ordering::Less));
        assert!(all.iter().all(|c| c.validate(&[2, 1, 1, 2]).is_ok()));
        let [g, b, a] = level_sizes(&[2, 1, 1, 2]);
        assert_eq!((g + b + a) as usize, all.len());
        assert_eq!(b + a, 13);
    }

    #[test]
    fn t_matrices() {
        assert_eq!(counting_matrix_t(2), CountMatrix::from_i64([[0, 3, 2], [1, 0, 0], [0, 2, 1]]));
        assert_eq!(counting_matrix_t(1), CountMatrix::from_i64([[0, 2, 1], [1, 0, 0], [0, 1, 0]]));
        let v = counting_matrix_t(2).apply(&[0, 0, 1].map(BigInt::from));
        assert_eq!(v, [2, 0, 1].map(BigInt::from));
        for c in 1..5 {
            let n = count_descendants(Letter::A(1), &[c]);
            let v = counting_matrix_t(c).apply(&[0, 0, 1].map(BigInt::from));
            assert_eq!(v, n.map(BigInt::from));
        }
    }

    #[test]
    fn s_matrices() {
        assert_eq!(cumulative_s(&[]).unwrap().0, CountMatrix::identity());
        let (s, inv) = cumulative_s(&[2, 1, 1, 2]).unwrap();
        assert_eq!(s, s_closed(&[2, 1, 1, 2]));
        assert_eq!(inv.mul(&s), CountMatrix::identity());
        let e: Vec<u64> = vec![3, 1, 2, 2, 1, 3, 1, 1, 2, 3, 1, 2];
        for k in 0..=e.len() {
            let (s, _) = cumulative_s(&e[..k]).unwrap();
            assert_eq!(s.det().abs(), BigInt::one());
        }
    }

    #[test]
    fn extension_examples() {
        let e = [2, 1, 1, 2];
        assert_eq!(extension_count(&e, 0, Label::A).unwrap(), BigInt::from(8));
        assert_eq!(extension_count(&e, 1, Label::G).unwrap(), BigInt::from(3));
        assert_eq!(extension_count(&e, 4, Label::A).unwrap(), BigInt::one());
        assert_eq!(extension_count(&e, 4, Label::G).unwrap(), BigInt::zero());
        assert_eq!(extension_count_brute(&e, 0, Label::A), Some(8));
        assert_eq!(extension_count_brute(&e, 1, Label::G), Some(3));
        let conv = convergents(&e, 4);
        assert_eq!(p_coeff(4, 4, &conv), BigInt::zero());
        assert_eq!(p_coeff(1, 4, &conv), BigInt::from(3));
        assert_eq!(p_coeff(-1, 4, &conv), BigInt::from(13));
    }

    #[test]
    fn counting_example() {
        let e = [2, 1, 1, 2];
        let g = code("G2.B.G2.B.G2");
        let (n, per) = left_count(&g, &e, 4).unwrap();
        assert_eq!(n, BigInt::from(12));
        assert_eq!(per, [8, 0, 3, 0, 1].map(BigInt::from).to_vec());
        assert_eq!(left_count_brute(&g, &e, 4).unwrap(), 12);
        let first = enumerate_codes(&e, false).unwrap().remove(0);
        assert_eq!(left_count(&first, &e, 4).unwrap().0, BigInt::zero());
    }

    #[test]
    fn mu_examples() {
        let e = [2, 1, 1, 2, 2, 1];
        let mu = mu_of_code(&code("G2.B.G2.B.G2.B"), &e).unwrap();
        assert_eq!(mu.values(), &[1, -1, 1, 0, 1, 0]);
        assert_eq!(mu_of_code(&code("A1.G1"), &e).unwrap().get(-1), 0);
        let mu = mu_of_code(&code("G2.B"), &e).unwrap();
        assert_eq!((mu.get(-1), mu.get(0)), (1, -1));
        let back = code_of_mu(&MuSeq::new(vec![1, -1, 0]), &e).unwrap();
        assert_eq!(back.letters()[..2], [Letter::G(2), Letter::B]);
        for c in enumerate_codes(&e[..4], false).unwrap() {
            let mu = mu_of_code(&c, &e).unwrap();
            let kind = if c.last().unwrap().is_a() { 1 } else { 0 };
            let mut full = mu.values().to_vec();
            full.push(kind);
            assert_eq!(code_of_mu(&MuSeq::new(full), &e).unwrap(), c);
        }
    }

    #[test]
    fn geometric_tree() {
        let mut s = Spectra::new(5.0);
        let tree = CodeTree::build(&mut s, &[2, 1, 1], 3).unwrap();
        let b = tree.band_of(&code("A1")).unwrap();
        assert_eq!((b.lo_f64(), b.hi_f64()), (-2.0, 2.0));
        let b = tree.band_of(&code("G2")).unwrap();
        assert_eq!((b.lo_f64(), b.hi_f64()), (3.0, 7.0));
        let b = tree.band_of(&code("A1.G1")).unwrap();
        assert_eq!(b.owner.entries(), &[0, 0, 2, 1]);
        assert_eq!(b.index, 0);
        assert_eq!(tree.level(3).iter().filter(|n| n.code.is_spectral()).count(), 5);
    }
}
