use super::poset::{local_perp, WeightPoset};
use crate::field::{Field, Rational};
use crate::lie::WeightLabel;
use crate::linalg::Matrix;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// How a weight-space choice sits inside the space allowed by closure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "special")]
pub enum Stratum {
    /// Nothing chosen.
    Zero,
    /// The whole allowed space.
    Whole,
    /// A generic subspace of the allowed space.
    Generic,
    /// Contains the given distinguished subspace.
    Contains(usize),
    /// Inside the given distinguished subspace.
    Within(usize),
}

/// One weight-space decision along an enumeration path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub space: usize,
    pub dim: usize,
    /// Dimension of the raising-closed space the choice was made in.
    pub available: usize,
    pub stratum: Stratum,
    /// Dimension of the distinguished subspace, when one is used.
    pub special_dim: usize,
}

impl Step {
    fn parameters(&self) -> usize {
        let (d, u, s) = (self.dim, self.available, self.special_dim);
        match self.stratum {
            Stratum::Zero | Stratum::Whole => 0,
            Stratum::Generic => d * (u - d),
            Stratum::Contains(_) => (d - s) * (u - d),
            Stratum::Within(_) => d * (s - d),
        }
    }

    fn code(&self) -> u64 {
        let s = match self.stratum {
            Stratum::Zero => 0,
            Stratum::Whole => 1,
            Stratum::Generic => 2,
            Stratum::Contains(j) => 3 + 2 * j as u64,
            Stratum::Within(j) => 4 + 2 * j as u64,
        };
        (self.space as u64) << 32 | (self.dim as u64) << 16 | s
    }
}

/// A raising-closed weight-graded subspace, or a stratum of them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BorelCandidate {
    pub id: usize,
    pub dim: usize,
    /// Nonzero per-weight dimensions, in poset order.
    pub profile: Vec<(WeightLabel, usize)>,
    pub parameterized: bool,
    pub parameter_count: usize,
    /// Closure conditions defining the stratum, one line per free choice.
    pub constraints: Vec<String>,
    pub steps: Vec<Step>,
    /// Steps were taken in the dual poset; the candidate is the annihilator.
    pub complement: bool,
    pub seed: u64,
    /// Explicit lattice point for probed candidates, one entry per free step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<ProbeChoice>>,
}

/// A free choice fixed by small integer data in the closure-space basis:
/// either the span of `vectors`, or their common kernel.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbeChoice {
    pub span: bool,
    pub vectors: Vec<Vec<i64>>,
}

impl ProbeChoice {
    /// Coefficient matrix (rows: chosen vectors) for a closure space of dim `u`.
    pub fn coefficients(&self, u: usize) -> Matrix<Rational> {
        let rows: Vec<Vec<Rational>> = self.vectors.iter().map(|v| v.iter().map(|&x| Rational::from_i64(x)).collect()).collect();
        if self.span {
            Matrix::from_rows(&rows, u)
        } else {
            let k = local_perp(&rows, u);
            Matrix::from_rows(&k, u)
        }
    }
}

/// Per-space local bases of one numeric instance.
pub type Instance = Vec<Vec<Vec<Rational>>>;

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub seed: u64,
    /// Enumerate the annihilator in the dual poset when dim exceeds half.
    pub allow_dual: bool,
    /// Distinguished subspaces used to split parameterized choices.
    pub special_strata: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { seed: 0, allow_dual: true, special_strata: true }
    }
}

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb)
}

fn canonical(vectors: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return vec![];
    }
    let (r, piv) = Matrix::from_rows(vectors, n).rref();
    (0..piv.len()).map(|i| r.row(i).to_vec()).collect()
}

fn intersect(a: &[Vec<Rational>], b: &[Vec<Rational>], n: usize) -> Vec<Vec<Rational>> {
    let mut rows = local_perp(a, n);
    rows.extend(local_perp(b, n));
    local_perp(&canonical(&rows, n), n)
}

/// Source of coefficients for free choices.
enum Coeffs<'a> {
    Random(ChaCha8Rng),
    Given(std::slice::Iter<'a, Matrix<Rational>>),
}

impl Coeffs<'_> {
    fn combos(&mut self, basis: &[Vec<Rational>], d: usize, n: usize) -> Vec<Vec<Rational>> {
        let lin = |c: &dyn Fn(usize, usize) -> Rational| -> Vec<Vec<Rational>> {
            (0..d)
                .map(|r| {
                    let mut v = vec![Rational::zero(); n];
                    for (k, b) in basis.iter().enumerate() {
                        let c = c(r, k);
                        if !c.is_zero() {
                            for (x, y) in v.iter_mut().zip(b) {
                                *x += c.clone() * y.clone();
                            }
                        }
                    }
                    v
                })
                .collect()
        };
        match self {
            Coeffs::Random(rng) => loop {
                let m: Vec<Vec<i64>> = (0..d).map(|_| (0..basis.len()).map(|_| rng.gen_range(-7..=7)).collect()).collect();
                let out = lin(&|r, k| Rational::from_i64(m[r][k]));
                if canonical(&out, n).len() == d {
                    return out;
                }
            },
            Coeffs::Given(it) => match it.next() {
                Some(m) if m.rows() == d && m.cols() == basis.len() => lin(&|r, k| m.get(r, k).clone()),
                _ => vec![],
            },
        }
    }
}

struct Walker<'a> {
    poset: &'a WeightPoset,
    specials: bool,
    suffix: Vec<usize>,
}

/// Context at one space: allowed space and distinguished subspaces.
struct Local {
    allowed: Vec<Vec<Rational>>,
    specials: Vec<Vec<Vec<Rational>>>,
}

impl Walker<'_> {
    fn local(&self, i: usize, chosen: &[Vec<Vec<Rational>>]) -> Local {
        let n = self.poset.spaces[i].dim();
        let mut rows = Vec::new();
        let mut kernel_rows = Vec::new();
        for e in self.poset.edges.iter().filter(|e| e.from == i) {
            let m = self.poset.spaces[e.to].dim();
            for r in 0..e.block.rows() {
                kernel_rows.push(e.block.row(r).to_vec());
            }
            for phi in local_perp(&chosen[e.to], m) {
                let row: Vec<Rational> = (0..n)
                    .map(|c| (0..m).fold(Rational::zero(), |acc, r| acc + phi[r].clone() * e.block.get(r, c).clone()))
                    .collect();
                rows.push(row);
            }
        }
        let allowed = if rows.is_empty() { local_perp(&[], n) } else { canonical(&Matrix::from_rows(&rows, n).kernel(), n) };
        let mut specials: Vec<Vec<Vec<Rational>>> = Vec::new();
        if self.specials && allowed.len() > 1 {
            let mut cands = vec![if kernel_rows.is_empty() { local_perp(&[], n) } else { Matrix::from_rows(&kernel_rows, n).kernel() }];
            for e in self.poset.edges.iter().filter(|e| e.to == i) {
                cands.push(e.block.image());
            }
            for c in cands {
                let s = canonical(&intersect(&c, &allowed, n), n);
                if !s.is_empty() && s.len() < allowed.len() && !specials.contains(&s) {
                    specials.push(s);
                }
            }
        }
        Local { allowed, specials }
    }

    /// Options at a space with `remaining` dimensions left to place.
    fn options(&self, i: usize, loc: &Local, remaining: usize) -> Vec<Step> {
        let u = loc.allowed.len();
        let cap = self.suffix[i + 1];
        let mut out = Vec::new();
        for d in 0..=u.min(remaining) {
            if remaining - d > cap {
                continue;
            }
            let base = Step { space: i, dim: d, available: u, stratum: Stratum::Zero, special_dim: 0 };
            if d == 0 {
                out.push(base);
            } else if d == u {
                out.push(Step { stratum: Stratum::Whole, ..base });
            } else {
                out.push(Step { stratum: Stratum::Generic, ..base.clone() });
                for (j, s) in loc.specials.iter().enumerate() {
                    let sd = s.len();
                    if sd <= d {
                        out.push(Step { stratum: Stratum::Contains(j), special_dim: sd, ..base.clone() });
                    }
                    if sd > d {
                        out.push(Step { stratum: Stratum::Within(j), special_dim: sd, ..base.clone() });
                    }
                }
            }
        }
        out
    }

    fn realize(&self, step: &Step, loc: &Local, coeffs: &mut Coeffs) -> Option<Vec<Vec<Rational>>> {
        let n = self.poset.spaces[step.space].dim();
        let out = match step.stratum {
            Stratum::Zero => vec![],
            Stratum::Whole => loc.allowed.clone(),
            Stratum::Generic => coeffs.combos(&loc.allowed, step.dim, n),
            Stratum::Contains(j) => {
                let mut out = loc.specials[j].clone();
                let extra = step.dim - out.len();
                if extra > 0 {
                    out.extend(coeffs.combos(&loc.allowed, extra, n));
                }
                out
            }
            Stratum::Within(j) => coeffs.combos(&loc.specials[j], step.dim, n),
        };
        (canonical(&out, n).len() == step.dim).then_some(out)
    }

    /// Whether the replayed local context has the same shape as recorded.
    fn matches(step: &Step, loc: &Local) -> bool {
        if loc.allowed.len() != step.available {
            return false;
        }
        match step.stratum {
            Stratum::Contains(j) | Stratum::Within(j) => loc.specials.get(j).is_some_and(|s| s.len() == step.special_dim),
            _ => true,
        }
    }
}

struct Dfs<'a> {
    walker: Walker<'a>,
    seed: u64,
    path: Vec<Step>,
    chosen: Vec<Vec<Vec<Rational>>>,
    found: Vec<Vec<Step>>,
}

impl Dfs<'_> {
    fn run(&mut self, i: usize, remaining: usize, hash: u64) {
        if i == self.walker.poset.spaces.len() {
            if remaining == 0 {
                self.found.push(self.path.clone());
            }
            return;
        }
        let loc = self.walker.local(i, &self.chosen);
        for step in self.walker.options(i, &loc, remaining) {
            let h = mix(hash, step.code());
            let mut coeffs = Coeffs::Random(ChaCha8Rng::seed_from_u64(mix(self.seed, h)));
            self.chosen[i] = self.walker.realize(&step, &loc, &mut coeffs).expect("random choices have full rank");
            let d = step.dim;
            self.path.push(step);
            self.run(i + 1, remaining - d, h);
            self.path.pop();
        }
        self.chosen[i].clear();
    }
}

/// All raising-closed weight-graded subspaces of the given dimension, one
/// candidate per stratum.
pub fn enumerate_borel_fixed(poset: &WeightPoset, dim: usize) -> Vec<BorelCandidate> {
    enumerate_borel_fixed_with(poset, dim, &EnumOptions::default())
}

pub fn enumerate_borel_fixed_with(poset: &WeightPoset, dim: usize, opts: &EnumOptions) -> Vec<BorelCandidate> {
    let total = poset.total_dim();
    if dim > total {
        return vec![];
    }
    let complement = opts.allow_dual && 2 * dim > total;
    let work = if complement { poset.dual() } else { poset.clone() };
    let target = if complement { total - dim } else { dim };
    let n = work.spaces.len();
    let mut suffix = vec![0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + work.spaces[i].dim();
    }
    let walker = Walker { poset: &work, specials: opts.special_strata, suffix };
    let mut dfs = Dfs { walker, seed: opts.seed, path: vec![], chosen: vec![vec![]; n], found: vec![] };
    dfs.run(0, target, 0);
    dfs.found
        .into_iter()
        .enumerate()
        .map(|(id, steps)| {
            let parameter_count = steps.iter().map(Step::parameters).sum();
            let constraints = steps
                .iter()
                .filter(|s| s.parameters() > 0)
                .map(|s| {
                    let w = &work.spaces[s.space].weight;
                    match s.stratum {
                        Stratum::Contains(j) => format!("{w}: {}-plane in closure space of dim {} containing special subspace {j} (dim {})", s.dim, s.available, s.special_dim),
                        Stratum::Within(j) => format!("{w}: {}-plane inside special subspace {j} (dim {}) of closure space of dim {}", s.dim, s.special_dim, s.available),
                        _ => format!("{w}: generic {}-plane in closure space of dim {}", s.dim, s.available),
                    }
                })
                .collect();
            let mut dims = vec![0; n];
            for s in &steps {
                dims[s.space] = s.dim;
            }
            let profile = profile_of(poset, &dims, complement);
            BorelCandidate {
                id,
                dim,
                profile,
                parameterized: parameter_count > 0,
                parameter_count,
                constraints,
                steps,
                complement,
                seed: opts.seed,
                probe: None,
            }
        })
        .collect()
}

impl BorelCandidate {
    /// Numeric instance `sample` in local coordinates of `poset` (sample 0 is
    /// the representative used during enumeration). Parameter-free
    /// candidates return the same instance for every sample.
    pub fn instance(&self, poset: &WeightPoset, sample: u64) -> Instance {
        if let Some(probe) = &self.probe {
            let free = self.steps.iter().filter(|s| s.parameters() > 0);
            let coeffs: Vec<Matrix<Rational>> = free.zip(probe).map(|(s, c)| c.coefficients(s.available)).collect();
            return self.instance_with(poset, &coeffs).expect("probe path replays");
        }
        let mut attempt = 0u64;
        loop {
            let salt = if sample == 0 && attempt == 0 { self.seed } else { mix(self.seed, mix(sample, attempt)) };
            let mut hash = 0u64;
            let found = self.replay(poset, |step| {
                hash = mix(hash, step.code());
                Coeffs::Random(ChaCha8Rng::seed_from_u64(mix(salt, hash)))
            });
            if let Some(inst) = found {
                return inst;
            }
            attempt += 1;
        }
    }

    /// Instance with explicit coefficients, one matrix per free choice in
    /// step order: rows are the new vectors, columns index the basis of the
    /// space the choice is made in (closure space, or the special subspace
    /// for `Within`). `None` when the coefficients leave the stratum.
    pub fn instance_with(&self, poset: &WeightPoset, coeffs: &[Matrix<Rational>]) -> Option<Instance> {
        let mut it = coeffs.iter();
        let mut next = |step: &Step| match step.parameters() {
            0 => Coeffs::Given([].iter()),
            _ => Coeffs::Given(it.next().map_or([].iter(), |m| std::slice::from_ref(m).iter())),
        };
        self.replay(poset, &mut next)
    }

    fn replay<'a>(&self, poset: &WeightPoset, mut coeffs: impl FnMut(&Step) -> Coeffs<'a>) -> Option<Instance> {
        let work = if self.complement { poset.dual() } else { poset.clone() };
        let n = work.spaces.len();
        let walker = Walker { poset: &work, specials: true, suffix: vec![0; n + 1] };
        let mut chosen: Instance = vec![vec![]; n];
        for step in &self.steps {
            let loc = walker.local(step.space, &chosen);
            if !Walker::matches(step, &loc) {
                return None;
            }
            let mut c = coeffs(step);
            chosen[step.space] = walker.realize(step, &loc, &mut c)?;
        }
        if !self.complement {
            return Some(chosen);
        }
        Some((0..n).map(|i| local_perp(&chosen[n - 1 - i], poset.spaces[i].dim())).collect())
    }

    /// Instance basis in ambient coordinates of the poset's module.
    pub fn ambient_basis(&self, poset: &WeightPoset, sample: u64) -> Vec<Vec<Rational>> {
        let inst = self.instance(poset, sample);
        let mut out = Vec::new();
        for (space, local) in poset.spaces.iter().zip(inst) {
            for v in local {
                let mut full = vec![Rational::zero(); poset.ambient_dim];
                for (c, b) in v.iter().zip(&space.basis) {
                    if !c.is_zero() {
                        for (x, y) in full.iter_mut().zip(b) {
                            *x += c.clone() * y.clone();
                        }
                    }
                }
                out.push(full);
            }
        }
        out
    }

    /// Exact closure check of an instance under every raising block.
    pub fn is_closed(poset: &WeightPoset, inst: &Instance) -> bool {
        poset.edges.iter().all(|e| {
            let target = &inst[e.to];
            let m = poset.spaces[e.to].dim();
            let phis = local_perp(target, m);
            inst[e.from].iter().all(|v| {
                let img = e.block.apply(v);
                phis.iter().all(|phi| phi.iter().zip(&img).fold(Rational::zero(), |a, (x, y)| a + x.clone() * y.clone()).is_zero())
            })
        })
    }
}

/// Small integer vectors in dimension u with entries in {-1, 0, 1}, first
/// nonzero entry 1.
fn unit_sign_vectors(u: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(u as u32);
    for code in 1..total {
        let mut c = code;
        let v: Vec<i64> = (0..u)
            .map(|_| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                d
            })
            .collect();
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v);
        }
    }
    out
}

fn unit_vectors(u: usize) -> Vec<Vec<i64>> {
    (0..u).map(|i| (0..u).map(|j| i64::from(i == j)).collect()).collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Lattice points of Gr(d, u) probed at a free step: lines and hyperplanes
/// with {-1,0,1} coordinates, coordinate subspaces otherwise.
pub fn probe_choices(u: usize, d: usize) -> Vec<ProbeChoice> {
    if d == 0 || d >= u {
        return vec![];
    }
    let (span, k) = if d <= u - d { (true, d) } else { (false, u - d) };
    let pool = if k == 1 { unit_sign_vectors(u) } else { unit_vectors(u) };
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for sub in subsets(pool.len(), k) {
        let vectors: Vec<Vec<i64>> = sub.iter().map(|&i| pool[i].clone()).collect();
        let choice = ProbeChoice { span, vectors };
        let m = choice.coefficients(u);
        let key = canonical(&(0..m.rows()).map(|r| m.row(r).to_vec()).collect::<Vec<_>>(), u);
        if key.len() == d && seen.insert(key) {
            out.push(choice);
        }
    }
    out
}

struct Probe<'a> {
    walker: Walker<'a>,
    path: Vec<Step>,
    choices: Vec<ProbeChoice>,
    chosen: Vec<Vec<Vec<Rational>>>,
    found: Vec<(Vec<Step>, Vec<ProbeChoice>)>,
    limit: usize,
}

impl Probe<'_> {
    fn run(&mut self, i: usize, remaining: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if i == self.walker.poset.spaces.len() {
            if remaining == 0 {
                self.found.push((self.path.clone(), self.choices.clone()));
            }
            return;
        }
        let loc = self.walker.local(i, &self.chosen);
        let u = loc.allowed.len();
        for d in 0..=u.min(remaining) {
            if remaining - d > self.walker.suffix[i + 1] {
                continue;
            }
            let base = Step { space: i, dim: d, available: u, stratum: Stratum::Zero, special_dim: 0 };
            if d == 0 || d == u {
                let step = Step { stratum: if d == 0 { Stratum::Zero } else { Stratum::Whole }, ..base };
                self.chosen[i] = if d == 0 { vec![] } else { loc.allowed.clone() };
                self.path.push(step);
                self.run(i + 1, remaining - d);
                self.path.pop();
                continue;
            }
            for choice in probe_choices(u, d) {
                let step = Step { stratum: Stratum::Generic, ..base.clone() };
                let m = choice.coefficients(u);
                let mut coeffs = Coeffs::Given(std::slice::from_ref(&m).iter());
                let Some(g) = self.walker.realize(&step, &loc, &mut coeffs) else { continue };
                self.chosen[i] = g;
                self.path.push(step);
                self.choices.push(choice);
                self.run(i + 1, remaining - d);
                self.choices.pop();
                self.path.pop();
            }
        }
        self.chosen[i].clear();
    }
}

/// Parameter-free Borel-fixed subspaces obtained by fixing every free
/// choice at a small lattice point (see [`probe_choices`]). These are exact
/// rational candidates; they cover special members of parameterized strata
/// that random sampling misses. At most `limit` are returned.
pub fn probe_borel_fixed(poset: &WeightPoset, dim: usize, opts: &EnumOptions, limit: usize) -> Vec<BorelCandidate> {
    let total = poset.total_dim();
    if dim > total {
        return vec![];
    }
    let complement = opts.allow_dual && 2 * dim > total;
    let work = if complement { poset.dual() } else { poset.clone() };
    let target = if complement { total - dim } else { dim };
    let n = work.spaces.len();
    let mut suffix = vec![0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + work.spaces[i].dim();
    }
    let walker = Walker { poset: &work, specials: false, suffix };
    let mut probe = Probe { walker, path: vec![], choices: vec![], chosen: vec![vec![]; n], found: vec![], limit };
    probe.run(0, target);
    probe
        .found
        .into_iter()
        .enumerate()
        .map(|(id, (steps, choices))| {
            let mut dims = vec![0; n];
            for s in &steps {
                dims[s.space] = s.dim;
            }
            let profile = profile_of(poset, &dims, complement);
            BorelCandidate {
                id,
                dim,
                profile,
                parameterized: false,
                parameter_count: 0,
                constraints: vec![],
                steps,
                complement,
                seed: opts.seed,
                probe: Some(choices),
            }
        })
        .collect()
}

fn profile_of(poset: &WeightPoset, dims: &[usize], complement: bool) -> Vec<(WeightLabel, usize)> {
    let n = poset.spaces.len();
    (0..n)
        .filter_map(|i| {
            let d = if complement { poset.spaces[i].dim() - dims[n - 1 - i] } else { dims[i] };
            (d > 0).then(|| (poset.spaces[i].weight.clone(), d))
        })
        .collect()
}
