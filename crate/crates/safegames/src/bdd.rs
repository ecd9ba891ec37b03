//! Reduced ordered BDDs with a hash-consed unique table.
//!
//! Handles (`BddRef`) are indices into a per-manager node store, so two
//! handles from the same manager are equal exactly when they denote the same
//! function. That makes fixpoint convergence a pointer comparison. There is
//! no garbage collection: a manager lives for one solve and is dropped whole.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Position of a variable in the fixed global order. Lower ids sit closer to
/// the root of every BDD in the manager.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

/// Handle to a BDD node. Only meaningful for the manager that produced it.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct BddRef(u32);

/// Interned set of variables, used by the quantifiers.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct SetId(u32);

/// Interned simultaneous substitution, used by compose.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct SubstId(u32);

const FALSE_IDX: u32 = 0;
const TRUE_IDX: u32 = 1;
const TERMINAL_VAR: u32 = u32::MAX;
const NO_ENTRY: u32 = u32::MAX;

#[derive(Copy, Clone)]
struct Node {
    var: u32,
    low: u32,
    high: u32,
}

/// Cooperative stop signal shared between a solver loop and its manager.
/// Cancellation is sticky; the deadline, if any, is folded into `is_stopped`.
#[derive(Clone)]
pub struct CancelToken {
    inner: Arc<CancelInner>,
}

struct CancelInner {
    flag: AtomicBool,
    deadline: Option<Instant>,
}

impl CancelToken {
    pub fn new() -> Self {
        CancelToken {
            inner: Arc::new(CancelInner {
                flag: AtomicBool::new(false),
                deadline: None,
            }),
        }
    }

    pub fn with_timeout(timeout: Duration) -> Self {
        CancelToken {
            inner: Arc::new(CancelInner {
                flag: AtomicBool::new(false),
                deadline: Some(Instant::now() + timeout),
            }),
        }
    }

    pub fn cancel(&self) {
        self.inner.flag.store(true, Ordering::Relaxed);
    }

    pub fn is_stopped(&self) -> bool {
        if self.inner.flag.load(Ordering::Relaxed) {
            return true;
        }
        match self.inner.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }
}

impl Default for CancelToken {
    fn default() -> Self {
        Self::new()
    }
}

// Multiply-xor hasher for the unique table; the keys are small tuples of u32
// and SipHash is needless overhead on this hot path.
#[derive(Default)]
struct FxLikeHasher(u64);

impl Hasher for FxLikeHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.write_u8(b);
        }
    }

    fn write_u8(&mut self, n: u8) {
        self.write_u64(n as u64);
    }

    fn write_u32(&mut self, n: u32) {
        self.write_u64(n as u64);
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0.rotate_left(5) ^ n).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }
}

type UniqueMap = HashMap<(u32, u32, u32), u32, BuildHasherDefault<FxLikeHasher>>;

#[derive(Copy, Clone)]
struct CacheEntry {
    tag: u32,
    a: u32,
    b: u32,
    c: u32,
    result: u32,
}

const EMPTY_TAG: u32 = u32::MAX;

mod op {
    pub const AND: u32 = 0;
    pub const OR: u32 = 1;
    pub const XOR: u32 = 2;
    pub const NOT: u32 = 3;
    pub const ITE: u32 = 4;
    pub const EXISTS: u32 = 5;
    pub const FORALL: u32 = 6;
    pub const COMPOSE: u32 = 7;
    pub const RESTRICT: u32 = 8;
}

struct VarSet {
    contains: Vec<bool>,
    max: u32, // u32::MAX when empty
}

struct Subst {
    // map[v] = node index of the replacement, NO_ENTRY when v maps to itself
    map: Vec<u32>,
    max: u32,
}

const CACHE_BITS: usize = 18;
const CANCEL_CHECK_MASK: u32 = (1 << 13) - 1;

pub struct BddManager {
    nodes: Vec<Node>,
    unique: UniqueMap,
    cache: Vec<CacheEntry>,
    var_count: u32,
    sets: Vec<VarSet>,
    substs: Vec<Subst>,
    token: Option<CancelToken>,
    stopped: bool,
    tick: u32,
    node_limit: usize,
}

impl BddManager {
    pub fn new() -> Self {
        let nodes = vec![
            Node { var: TERMINAL_VAR, low: 0, high: 0 },
            Node { var: TERMINAL_VAR, low: 1, high: 1 },
        ];
        BddManager {
            nodes,
            unique: UniqueMap::default(),
            cache: vec![
                CacheEntry { tag: EMPTY_TAG, a: 0, b: 0, c: 0, result: 0 };
                1 << CACHE_BITS
            ],
            var_count: 0,
            sets: Vec::new(),
            substs: Vec::new(),
            token: None,
            stopped: false,
            tick: 0,
            node_limit: usize::MAX,
        }
    }

    /// Abort (like a cancellation) once the node store grows past `limit`.
    /// Guards against memory blowup on hostile instances.
    pub fn set_node_limit(&mut self, limit: usize) {
        self.node_limit = limit;
    }

    pub fn const_false(&self) -> BddRef {
        BddRef(FALSE_IDX)
    }

    pub fn const_true(&self) -> BddRef {
        BddRef(TRUE_IDX)
    }

    /// Appends a fresh variable at the end of the order.
    pub fn fresh_var(&mut self) -> VarId {
        let v = VarId(self.var_count);
        self.var_count += 1;
        v
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    /// Total nodes ever created, terminals included. Monotone, so it doubles
    /// as the peak live-node count.
    pub fn node_store_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn set_token(&mut self, token: CancelToken) {
        if token.is_stopped() {
            self.stopped = true;
        }
        self.token = Some(token);
    }

    /// True once the attached token fired; results produced after that point
    /// are garbage and the manager should be discarded.
    pub fn interrupted(&self) -> bool {
        self.stopped
    }

    fn poll_cancel(&mut self) {
        self.tick = self.tick.wrapping_add(1);
        if self.tick & CANCEL_CHECK_MASK == 0 {
            if let Some(t) = &self.token {
                if t.is_stopped() {
                    self.stopped = true;
                }
            }
        }
    }

    fn node(&self, r: u32) -> Node {
        self.nodes[r as usize]
    }

    fn mk(&mut self, var: u32, low: u32, high: u32) -> u32 {
        if low == high {
            return low;
        }
        match self.unique.entry((var, low, high)) {
            std::collections::hash_map::Entry::Occupied(e) => *e.get(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let idx = self.nodes.len() as u32;
                self.nodes.push(Node { var, low, high });
                e.insert(idx);
                if self.nodes.len() >= self.node_limit {
                    self.stopped = true;
                }
                idx
            }
        }
    }

    pub fn var(&mut self, v: VarId) -> BddRef {
        assert!(v.0 < self.var_count, "variable {} not registered", v.0);
        BddRef(self.mk(v.0, FALSE_IDX, TRUE_IDX))
    }

    pub fn nvar(&mut self, v: VarId) -> BddRef {
        assert!(v.0 < self.var_count, "variable {} not registered", v.0);
        BddRef(self.mk(v.0, TRUE_IDX, FALSE_IDX))
    }

    fn cache_probe(&self, tag: u32, a: u32, b: u32, c: u32) -> Option<u32> {
        let h = cache_hash(tag, a, b, c) & ((1usize << CACHE_BITS) - 1);
        let e = &self.cache[h];
        if e.tag == tag && e.a == a && e.b == b && e.c == c {
            Some(e.result)
        } else {
            None
        }
    }

    fn cache_store(&mut self, tag: u32, a: u32, b: u32, c: u32, result: u32) {
        if self.stopped {
            return; // do not poison the cache with aborted partial results
        }
        let h = cache_hash(tag, a, b, c) & ((1usize << CACHE_BITS) - 1);
        self.cache[h] = CacheEntry { tag, a, b, c, result };
    }

    pub fn and(&mut self, f: BddRef, g: BddRef) -> BddRef {
        BddRef(self.and_rec(f.0, g.0))
    }

    fn and_rec(&mut self, f: u32, g: u32) -> u32 {
        if f == FALSE_IDX || g == FALSE_IDX {
            return FALSE_IDX;
        }
        if f == TRUE_IDX {
            return g;
        }
        if g == TRUE_IDX || f == g {
            return f;
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        let (a, b) = if f < g { (f, g) } else { (g, f) };
        if let Some(r) = self.cache_probe(op::AND, a, b, 0) {
            return r;
        }
        let nf = self.node(a);
        let ng = self.node(b);
        let v = nf.var.min(ng.var);
        let (f0, f1) = if nf.var == v { (nf.low, nf.high) } else { (a, a) };
        let (g0, g1) = if ng.var == v { (ng.low, ng.high) } else { (b, b) };
        let low = self.and_rec(f0, g0);
        let high = self.and_rec(f1, g1);
        let r = self.mk(v, low, high);
        self.cache_store(op::AND, a, b, 0, r);
        r
    }

    pub fn or(&mut self, f: BddRef, g: BddRef) -> BddRef {
        BddRef(self.or_rec(f.0, g.0))
    }

    fn or_rec(&mut self, f: u32, g: u32) -> u32 {
        if f == TRUE_IDX || g == TRUE_IDX {
            return TRUE_IDX;
        }
        if f == FALSE_IDX {
            return g;
        }
        if g == FALSE_IDX || f == g {
            return f;
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        let (a, b) = if f < g { (f, g) } else { (g, f) };
        if let Some(r) = self.cache_probe(op::OR, a, b, 0) {
            return r;
        }
        let nf = self.node(a);
        let ng = self.node(b);
        let v = nf.var.min(ng.var);
        let (f0, f1) = if nf.var == v { (nf.low, nf.high) } else { (a, a) };
        let (g0, g1) = if ng.var == v { (ng.low, ng.high) } else { (b, b) };
        let low = self.or_rec(f0, g0);
        let high = self.or_rec(f1, g1);
        let r = self.mk(v, low, high);
        self.cache_store(op::OR, a, b, 0, r);
        r
    }

    pub fn xor(&mut self, f: BddRef, g: BddRef) -> BddRef {
        BddRef(self.xor_rec(f.0, g.0))
    }

    fn xor_rec(&mut self, f: u32, g: u32) -> u32 {
        if f == g {
            return FALSE_IDX;
        }
        if f == FALSE_IDX {
            return g;
        }
        if g == FALSE_IDX {
            return f;
        }
        if f == TRUE_IDX {
            return self.not_rec(g);
        }
        if g == TRUE_IDX {
            return self.not_rec(f);
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        let (a, b) = if f < g { (f, g) } else { (g, f) };
        if let Some(r) = self.cache_probe(op::XOR, a, b, 0) {
            return r;
        }
        let nf = self.node(a);
        let ng = self.node(b);
        let v = nf.var.min(ng.var);
        let (f0, f1) = if nf.var == v { (nf.low, nf.high) } else { (a, a) };
        let (g0, g1) = if ng.var == v { (ng.low, ng.high) } else { (b, b) };
        let low = self.xor_rec(f0, g0);
        let high = self.xor_rec(f1, g1);
        let r = self.mk(v, low, high);
        self.cache_store(op::XOR, a, b, 0, r);
        r
    }

    pub fn not(&mut self, f: BddRef) -> BddRef {
        BddRef(self.not_rec(f.0))
    }

    fn not_rec(&mut self, f: u32) -> u32 {
        if f == FALSE_IDX {
            return TRUE_IDX;
        }
        if f == TRUE_IDX {
            return FALSE_IDX;
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::NOT, f, 0, 0) {
            return r;
        }
        let n = self.node(f);
        let low = self.not_rec(n.low);
        let high = self.not_rec(n.high);
        let r = self.mk(n.var, low, high);
        self.cache_store(op::NOT, f, 0, 0, r);
        r
    }

    pub fn implies(&mut self, f: BddRef, g: BddRef) -> BddRef {
        let nf = self.not(f);
        self.or(nf, g)
    }

    pub fn iff(&mut self, f: BddRef, g: BddRef) -> BddRef {
        let x = self.xor(f, g);
        self.not(x)
    }

    pub fn ite(&mut self, f: BddRef, g: BddRef, h: BddRef) -> BddRef {
        BddRef(self.ite_rec(f.0, g.0, h.0))
    }

    fn ite_rec(&mut self, f: u32, g: u32, h: u32) -> u32 {
        if f == TRUE_IDX {
            return g;
        }
        if f == FALSE_IDX {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TRUE_IDX && h == FALSE_IDX {
            return f;
        }
        if g == FALSE_IDX && h == TRUE_IDX {
            return self.not_rec(f);
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::ITE, f, g, h) {
            return r;
        }
        let nf = self.node(f);
        let ng = self.node(g);
        let nh = self.node(h);
        let v = nf.var.min(ng.var).min(nh.var);
        let (f0, f1) = if nf.var == v { (nf.low, nf.high) } else { (f, f) };
        let (g0, g1) = if ng.var == v { (ng.low, ng.high) } else { (g, g) };
        let (h0, h1) = if nh.var == v { (nh.low, nh.high) } else { (h, h) };
        let low = self.ite_rec(f0, g0, h0);
        let high = self.ite_rec(f1, g1, h1);
        let r = self.mk(v, low, high);
        self.cache_store(op::ITE, f, g, h, r);
        r
    }

    /// Interns a quantification set. Sets are compared by content, so
    /// repeated interning of the same variables yields the same id.
    pub fn intern_set(&mut self, vars: &[VarId]) -> SetId {
        let mut contains = vec![false; self.var_count as usize];
        let mut max = u32::MAX;
        for v in vars {
            assert!(v.0 < self.var_count, "variable {} not registered", v.0);
            contains[v.0 as usize] = true;
            max = if max == u32::MAX { v.0 } else { max.max(v.0) };
        }
        for (i, s) in self.sets.iter().enumerate() {
            if s.contains == contains {
                return SetId(i as u32);
            }
        }
        self.sets.push(VarSet { contains, max });
        SetId((self.sets.len() - 1) as u32)
    }

    pub fn intern_subst(&mut self, pairs: &[(VarId, BddRef)]) -> SubstId {
        let mut map = vec![NO_ENTRY; self.var_count as usize];
        let mut max = u32::MAX;
        for (v, r) in pairs {
            assert!(v.0 < self.var_count, "variable {} not registered", v.0);
            map[v.0 as usize] = r.0;
            max = if max == u32::MAX { v.0 } else { max.max(v.0) };
        }
        for (i, s) in self.substs.iter().enumerate() {
            if s.map == map {
                return SubstId(i as u32);
            }
        }
        self.substs.push(Subst { map, max });
        SubstId((self.substs.len() - 1) as u32)
    }

    pub fn exists(&mut self, set: SetId, f: BddRef) -> BddRef {
        BddRef(self.exists_rec(f.0, set))
    }

    fn exists_rec(&mut self, f: u32, set: SetId) -> u32 {
        let n = self.node(f);
        if n.var == TERMINAL_VAR {
            return f;
        }
        let max = self.sets[set.0 as usize].max;
        if max == u32::MAX || n.var > max {
            return f; // no quantified variable can appear below this level
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::EXISTS, f, set.0, 0) {
            return r;
        }
        let low = self.exists_rec(n.low, set);
        let high = self.exists_rec(n.high, set);
        let r = if self.sets[set.0 as usize].contains[n.var as usize] {
            self.or_rec(low, high)
        } else {
            self.mk(n.var, low, high)
        };
        self.cache_store(op::EXISTS, f, set.0, 0, r);
        r
    }

    /// Universal quantification, implemented directly (not via the exists
    /// dual) so the duality can serve as a test.
    pub fn forall(&mut self, set: SetId, f: BddRef) -> BddRef {
        BddRef(self.forall_rec(f.0, set))
    }

    fn forall_rec(&mut self, f: u32, set: SetId) -> u32 {
        let n = self.node(f);
        if n.var == TERMINAL_VAR {
            return f;
        }
        let max = self.sets[set.0 as usize].max;
        if max == u32::MAX || n.var > max {
            return f;
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::FORALL, f, set.0, 0) {
            return r;
        }
        let low = self.forall_rec(n.low, set);
        let high = self.forall_rec(n.high, set);
        let r = if self.sets[set.0 as usize].contains[n.var as usize] {
            self.and_rec(low, high)
        } else {
            self.mk(n.var, low, high)
        };
        self.cache_store(op::FORALL, f, set.0, 0, r);
        r
    }

    /// Simultaneous substitution of functions for variables. This is the
    /// backward-image workhorse: no primed variables exist anywhere.
    pub fn compose(&mut self, f: BddRef, subst: SubstId) -> BddRef {
        BddRef(self.compose_rec(f.0, subst))
    }

    fn compose_rec(&mut self, f: u32, subst: SubstId) -> u32 {
        let n = self.node(f);
        if n.var == TERMINAL_VAR {
            return f;
        }
        let max = self.substs[subst.0 as usize].max;
        if max == u32::MAX || n.var > max {
            return f; // nothing below this level is substituted
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::COMPOSE, f, subst.0, 0) {
            return r;
        }
        let low = self.compose_rec(n.low, subst);
        let high = self.compose_rec(n.high, subst);
        let mapped = self.substs[subst.0 as usize].map[n.var as usize];
        let r = if mapped == NO_ENTRY {
            // the variable stands for itself; ite keeps the result ordered
            // even though low/high may now contain variables above n.var
            let g = self.mk(n.var, FALSE_IDX, TRUE_IDX);
            self.ite_rec(g, high, low)
        } else {
            self.ite_rec(mapped, high, low)
        };
        self.cache_store(op::COMPOSE, f, subst.0, 0, r);
        r
    }

    /// Generalized cofactor (restrict). Contract: gencof(f,g) AND g == f AND g,
    /// and the result never has more nodes than f. With g == false the care
    /// set is empty; f is returned unchanged and a warning logged.
    pub fn gencof(&mut self, f: BddRef, g: BddRef) -> BddRef {
        if g.0 == FALSE_IDX {
            log::warn!("gencof called with an empty care set; returning f unchanged");
            return f;
        }
        let candidate = BddRef(self.restrict_rec(f.0, g.0));
        // Sibling substitution can occasionally grow the result; the size
        // bound is part of the contract, so fall back to f when it does.
        if self.node_count(candidate) > self.node_count(f) {
            f
        } else {
            candidate
        }
    }

    fn restrict_rec(&mut self, f: u32, g: u32) -> u32 {
        if g == TRUE_IDX || f == FALSE_IDX || f == TRUE_IDX {
            return f;
        }
        if g == FALSE_IDX {
            return f; // unreachable from the public entry, kept for safety
        }
        if self.stopped {
            return FALSE_IDX;
        }
        self.poll_cancel();
        if let Some(r) = self.cache_probe(op::RESTRICT, f, g, 0) {
            return r;
        }
        let nf = self.node(f);
        let ng = self.node(g);
        let r = if ng.var < nf.var {
            // g branches on a variable f does not depend on here: merge the
            // two care branches and continue
            let joined = self.or_rec(ng.low, ng.high);
            self.restrict_rec(f, joined)
        } else if ng.var == nf.var {
            if ng.low == FALSE_IDX {
                self.restrict_rec(nf.high, ng.high)
            } else if ng.high == FALSE_IDX {
                self.restrict_rec(nf.low, ng.low)
            } else {
                let low = self.restrict_rec(nf.low, ng.low);
                let high = self.restrict_rec(nf.high, ng.high);
                self.mk(nf.var, low, high)
            }
        } else {
            let low = self.restrict_rec(nf.low, g);
            let high = self.restrict_rec(nf.high, g);
            self.mk(nf.var, low, high)
        };
        self.cache_store(op::RESTRICT, f, g, 0, r);
        r
    }

    /// Variables the function actually depends on, ascending.
    pub fn support(&self, f: BddRef) -> Vec<VarId> {
        let mut seen = vec![false; self.var_count as usize];
        let mut visited = HashMap::default();
        self.support_rec(f.0, &mut seen, &mut visited);
        (0..self.var_count)
            .filter(|&v| seen[v as usize])
            .map(VarId)
            .collect()
    }

    fn support_rec(&self, f: u32, seen: &mut [bool], visited: &mut HashMap<u32, ()>) {
        if f == FALSE_IDX || f == TRUE_IDX || visited.contains_key(&f) {
            return;
        }
        visited.insert(f, ());
        let n = self.node(f);
        seen[n.var as usize] = true;
        self.support_rec(n.low, seen, visited);
        self.support_rec(n.high, seen, visited);
    }

    /// Internal (non-terminal) nodes reachable from f. Constants count 0.
    pub fn node_count(&self, f: BddRef) -> usize {
        let mut visited: HashMap<u32, ()> = HashMap::default();
        let mut stack = vec![f.0];
        let mut count = 0;
        while let Some(r) = stack.pop() {
            if r == FALSE_IDX || r == TRUE_IDX || visited.contains_key(&r) {
                continue;
            }
            visited.insert(r, ());
            count += 1;
            let n = self.node(r);
            stack.push(n.low);
            stack.push(n.high);
        }
        count
    }

    /// Evaluates f at a full assignment indexed by variable position.
    pub fn eval(&self, f: BddRef, assignment: &[bool]) -> bool {
        let mut cur = f.0;
        loop {
            if cur == TRUE_IDX {
                return true;
            }
            if cur == FALSE_IDX {
                return false;
            }
            let n = self.node(cur);
            cur = if assignment[n.var as usize] { n.high } else { n.low };
        }
    }

    /// Evaluates f with every variable false. This is the initial-state test:
    /// AIGER latches start at zero.
    pub fn eval_all_false(&self, f: BddRef) -> bool {
        let mut cur = f.0;
        loop {
            if cur == TRUE_IDX {
                return true;
            }
            if cur == FALSE_IDX {
                return false;
            }
            cur = self.node(cur).low;
        }
    }

    /// Graphviz dump for debugging. `names` maps variable positions to
    /// display names; missing entries fall back to positional names.
    pub fn to_dot(&self, f: BddRef, names: &dyn Fn(VarId) -> String) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph bdd {\n  rankdir=TB;\n");
        out.push_str("  f [shape=none,label=\"f\"];\n");
        out.push_str("  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n");
        let mut visited: HashMap<u32, ()> = HashMap::default();
        let mut stack = vec![f.0];
        let _ = writeln!(out, "  f -> n{};", f.0);
        while let Some(r) = stack.pop() {
            if r == FALSE_IDX || r == TRUE_IDX || visited.contains_key(&r) {
                continue;
            }
            visited.insert(r, ());
            let n = self.node(r);
            let _ = writeln!(
                out,
                "  n{} [shape=circle,label=\"{}\"];",
                r,
                names(VarId(n.var))
            );
            let _ = writeln!(out, "  n{} -> n{} [style=dashed];", r, n.low);
            let _ = writeln!(out, "  n{} -> n{};", r, n.high);
            stack.push(n.low);
            stack.push(n.high);
        }
        out.push_str("}\n");
        out
    }

    /// One satisfying assignment as (var, value) pairs over the support,
    /// or None for the constant-false function.
    pub fn some_witness(&self, f: BddRef) -> Option<Vec<(VarId, bool)>> {
        if f.0 == FALSE_IDX {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = f.0;
        while cur != TRUE_IDX {
            let n = self.node(cur);
            if n.low != FALSE_IDX {
                out.push((VarId(n.var), false));
                cur = n.low;
            } else {
                out.push((VarId(n.var), true));
                cur = n.high;
            }
        }
        Some(out)
    }
}

impl Default for BddManager {
    fn default() -> Self {
        Self::new()
    }
}

fn cache_hash(tag: u32, a: u32, b: u32, c: u32) -> usize {
    let mut h = tag as u64;
    h = (h.rotate_left(5) ^ a as u64).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    h = (h.rotate_left(5) ^ b as u64).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    h = (h.rotate_left(5) ^ c as u64).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    (h >> 16) as usize
}
