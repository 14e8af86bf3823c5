//! Reference implementations used as oracles by the integration tests.
//!
//! `naive_min_depth` re-derives transition semantics from the model types and
//! the expression evaluator; `tiny` generates small random models together
//! with a direct interpreter that shares no code with the library at all.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet, VecDeque};

use agentconform::checker::{Bounds, Counterexample};
use agentconform::expr::{Evaluator, MapEnv};
use agentconform::ir::{ProtocolModel, Property, Sort, TransitionKind};
use agentconform::value::{Atom, Value};

type State = BTreeMap<String, Value>;

fn env(model: &ProtocolModel, state: &State) -> MapEnv {
    MapEnv {
        state: state.clone(),
        constants: model
            .constants
            .iter()
            .map(|d| (d.name.clone(), d.atoms.clone()))
            .collect(),
        known_atoms: None,
    }
}

fn holds(model: &ProtocolModel, p: &Property, s: &State) -> bool {
    let e = env(model, s);
    Evaluator::new(&e).eval_bool(&p.invariant).expect("invariant evaluates")
}

fn bindings(model: &ProtocolModel, domains: &[&str]) -> Vec<Vec<Atom>> {
    let mut out = vec![Vec::new()];
    for d in domains {
        let atoms = model.domain(d).expect("declared domain");
        out = out
            .into_iter()
            .flat_map(|prefix| {
                atoms.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn set_path(v: &mut Value, keys: &[Atom], new: Value) {
    match keys.split_first() {
        None => *v = new,
        Some((k, rest)) => match v {
            Value::Map(m) => set_path(m.get_mut(k).expect("key in domain"), rest, new),
            _ => panic!("indexing a non-map"),
        },
    }
}

fn leaf_sort(sort: &Sort, depth: usize) -> &Sort {
    match (sort, depth) {
        (s, 0) => s,
        (Sort::Map(_, inner), n) => leaf_sort(inner, n - 1),
        _ => panic!("path deeper than sort"),
    }
}

/// Successors of `s`, one per enabled (transition, binding).
fn successors(model: &ProtocolModel, s: &State) -> Vec<(String, State)> {
    let e = env(model, s);
    let mut out = Vec::new();
    for t in &model.transitions {
        let domains: Vec<&str> = t.params.iter().map(|p| p.domain.as_str()).collect();
        'binding: for b in bindings(model, &domains) {
            let mut ev = Evaluator::new(&e);
            for (p, a) in t.params.iter().zip(&b) {
                ev.bind(&p.name, Value::Atom(a.clone()));
            }
            if !ev.eval_bool(&t.guard).expect("guard evaluates") {
                continue;
            }
            let mut next = s.clone();
            for u in &t.updates {
                let keys: Vec<Atom> = u
                    .path
                    .iter()
                    .map(|k| match ev.eval(k).expect("index evaluates") {
                        Value::Atom(a) => a,
                        other => panic!("non-atom index {other}"),
                    })
                    .collect();
                let value = ev.eval(&u.value).expect("update evaluates");
                let sort = leaf_sort(&model.var(&u.var).expect("declared").sort, keys.len());
                if let (Sort::Counter(max), Value::Int(n)) = (sort, &value) {
                    if *n < 0 || n > max {
                        continue 'binding;
                    }
                }
                set_path(next.get_mut(&u.var).expect("declared"), &keys, value);
            }
            out.push((t.id.clone(), next));
        }
    }
    out
}

/// Breadth-first search over the bounded instance; the length of the
/// shortest path to a state violating `property`, if any is reachable
/// within `max_depth`.
pub fn naive_min_depth(model: &ProtocolModel, property: &str, bounds: &Bounds, max_depth: usize) -> Option<usize> {
    let m = bounds.apply(model).expect("bounds apply");
    let p = m.property(property).expect("property").clone();
    let init: State = m
        .state_vars
        .iter()
        .map(|v| (v.name.clone(), m.initial_value(v).expect("init")))
        .collect();
    let mut seen: HashSet<Vec<Value>> = HashSet::new();
    let key = |s: &State| s.values().cloned().collect::<Vec<_>>();
    seen.insert(key(&init));
    let mut queue = VecDeque::from([(init, 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        if !holds(&m, &p, &s) {
            return Some(d);
        }
        if d == max_depth {
            continue;
        }
        for (_, n) in successors(&m, &s) {
            if seen.insert(key(&n)) {
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

/// Number of reachable states of the bounded instance.
pub fn naive_state_count(model: &ProtocolModel, bounds: &Bounds) -> usize {
    let m = bounds.apply(model).expect("bounds apply");
    let init: State = m
        .state_vars
        .iter()
        .map(|v| (v.name.clone(), m.initial_value(v).expect("init")))
        .collect();
    let mut seen: HashSet<State> = HashSet::from([init.clone()]);
    let mut stack = vec![init];
    while let Some(s) = stack.pop() {
        for (_, n) in successors(&m, &s) {
            if seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    seen.len()
}

/// Whether every step of `cx` is an enabled transition of `model` and its
/// final state violates the property.
pub fn replays(model: &ProtocolModel, cx: &Counterexample, bounds: &Bounds) -> bool {
    let m = bounds.apply(model).expect("bounds apply");
    let p = m.property(&cx.property).expect("property").clone();
    let mut s: State = cx.initial.0.iter().cloned().collect();
    for step in &cx.steps {
        let want: State = step.state.0.iter().cloned().collect();
        if !successors(&m, &s).iter().any(|(a, n)| *a == step.action && *n == want) {
            return false;
        }
        s = want;
    }
    !holds(&m, &p, &s)
}

/// Copy of `model` without its Adversary transitions.
pub fn without_adversary(model: &ProtocolModel) -> ProtocolModel {
    let mut m = model.clone();
    m.transitions.retain(|t| t.kind != TransitionKind::Adversary);
    m
}

/// Tiny random models with an interpreter of their own.
pub mod tiny {
    use std::collections::{HashSet, VecDeque};

    use proptest::prelude::*;

    #[derive(Clone, Copy, Debug)]
    pub enum Kind {
        Bool,
        Counter(i64),
        /// Map from the key domain to Bool.
        Flags,
    }

    #[derive(Clone, Debug)]
    pub struct Var {
        pub kind: Kind,
        /// Bool and counter: the value; flags: bitmask over keys.
        pub init: i64,
    }

    #[derive(Clone, Copy, Debug)]
    pub enum Cmp {
        Eq,
        Ne,
        Lt,
        Le,
        Ge,
    }

    #[derive(Clone, Debug)]
    pub enum Atomic {
        /// var = b (bool var)
        IsTrue(usize, bool),
        /// counter op constant
        Counter(usize, Cmp, i64),
        /// flags[k] = b, k the transition parameter
        FlagAt(usize, bool),
        /// forall y in Keys: flags[y] = b
        AllFlags(usize, bool),
    }

    #[derive(Clone, Debug)]
    pub enum Assign {
        SetBool(usize, bool),
        Inc(usize, i64),
        SetCounter(usize, i64),
        SetFlag(usize, bool),
    }

    #[derive(Clone, Debug)]
    pub struct Trans {
        pub param: bool,
        pub guard: Vec<Atomic>,
        pub updates: Vec<Assign>,
    }

    #[derive(Clone, Debug)]
    pub struct Tiny {
        pub keys: usize,
        pub vars: Vec<Var>,
        pub trans: Vec<Trans>,
        /// Disjunction of conjunctions, negated atoms allowed.
        pub invariant: Vec<Vec<(bool, Atomic)>>,
    }

    fn cmp_text(c: Cmp) -> &'static str {
        match c {
            Cmp::Eq => "=",
            Cmp::Ne => "#",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
        }
    }

    fn atomic_text(a: &Atomic) -> String {
        match a {
            Atomic::IsTrue(v, b) => format!("v{v} = {b}"),
            Atomic::Counter(v, c, k) => format!("v{v} {} {k}", cmp_text(*c)),
            Atomic::FlagAt(v, b) => format!("v{v}[k] = {b}"),
            Atomic::AllFlags(v, b) => format!("(forall y in Keys: v{v}[y] = {b})"),
        }
    }

    impl Tiny {
        /// Model text in the IR syntax.
        pub fn text(&self) -> String {
            let keys: Vec<String> = (1..=self.keys).map(|i| format!("k{i}")).collect();
            let mut out = format!("protocol: tiny\nsnapshot: 2000-01-01\n\nconstants {{ Keys: [{}] }}\n\n", keys.join(", "));
            for (i, v) in self.vars.iter().enumerate() {
                let line = match v.kind {
                    Kind::Bool => format!("var v{i} : BOOL init {}\n", v.init != 0),
                    Kind::Counter(m) => format!("var v{i} : COUNTER({m}) init {}\n", v.init),
                    Kind::Flags => {
                        let entries: Vec<String> = (0..self.keys)
                            .map(|k| format!("k{}: {}", k + 1, v.init >> k & 1 == 1))
                            .collect();
                        format!("var v{i} : MAP(Keys -> BOOL) init {{{}}}\n", entries.join(", "))
                    }
                };
                out.push_str(&line);
            }
            for (i, t) in self.trans.iter().enumerate() {
                out.push_str(&format!("\ntransition T{i} {{\n  kind: Environment\n  actor: env\n"));
                if t.param {
                    out.push_str("  params: k in Keys\n");
                }
                let guard: Vec<String> = t.guard.iter().map(atomic_text).collect();
                let guard = if guard.is_empty() { "true".to_string() } else { guard.join(" and ") };
                out.push_str(&format!("  guard: {guard}\n"));
                for u in &t.updates {
                    let line = match u {
                        Assign::SetBool(v, b) => format!("v{v} := {b}"),
                        Assign::Inc(v, n) => format!("v{v} := v{v} + {n}"),
                        Assign::SetCounter(v, n) => format!("v{v} := {n}"),
                        Assign::SetFlag(v, b) => format!("v{v}[k] := {b}"),
                    };
                    out.push_str(&format!("  update: {line}\n"));
                }
                out.push_str("  source: invented\n}\n");
            }
            let disj: Vec<String> = self
                .invariant
                .iter()
                .map(|conj| {
                    let parts: Vec<String> = conj
                        .iter()
                        .map(|(neg, a)| {
                            if *neg {
                                format!("not ({})", atomic_text(a))
                            } else {
                                format!("({})", atomic_text(a))
                            }
                        })
                        .collect();
                    format!("({})", parts.join(" and "))
                })
                .collect();
            out.push_str(&format!(
                "\nproperty Inv {{\n  principle: P1\n  class: spec-mandated\n  invariant: {}\n  source: invented\n}}\n",
                disj.join(" or ")
            ));
            out
        }

        fn atomic(&self, a: &Atomic, s: &[i64], key: Option<usize>) -> bool {
            match *a {
                Atomic::IsTrue(v, b) => (s[v] != 0) == b,
                Atomic::Counter(v, c, k) => match c {
                    Cmp::Eq => s[v] == k,
                    Cmp::Ne => s[v] != k,
                    Cmp::Lt => s[v] < k,
                    Cmp::Le => s[v] <= k,
                    Cmp::Ge => s[v] >= k,
                },
                Atomic::FlagAt(v, b) => (s[v] >> key.expect("parameter") & 1 == 1) == b,
                Atomic::AllFlags(v, b) => (0..self.keys).all(|k| (s[v] >> k & 1 == 1) == b),
            }
        }

        fn invariant_holds(&self, s: &[i64]) -> bool {
            self.invariant
                .iter()
                .any(|conj| conj.iter().all(|(neg, a)| self.atomic(a, s, None) != *neg))
        }

        fn step(&self, t: &Trans, s: &[i64], key: Option<usize>) -> Option<Vec<i64>> {
            if !t.guard.iter().all(|a| self.atomic(a, s, key)) {
                return None;
            }
            let mut n = s.to_vec();
            for u in &t.updates {
                match *u {
                    Assign::SetBool(v, b) => n[v] = b as i64,
                    Assign::Inc(v, d) | Assign::SetCounter(v, d) => {
                        let value = if matches!(u, Assign::Inc(..)) { s[v] + d } else { d };
                        let Kind::Counter(max) = self.vars[v].kind else { unreachable!() };
                        if value < 0 || value > max {
                            return None;
                        }
                        n[v] = value;
                    }
                    Assign::SetFlag(v, b) => {
                        let k = key.expect("parameter");
                        n[v] = if b { n[v] | 1 << k } else { n[v] & !(1 << k) };
                    }
                }
            }
            Some(n)
        }

        /// Shortest violation depth and reachable state count.
        pub fn explore(&self) -> (Option<usize>, usize) {
            let init: Vec<i64> = self.vars.iter().map(|v| v.init).collect();
            let mut seen = HashSet::from([init.clone()]);
            let mut queue = VecDeque::from([(init, 0)]);
            let mut first = None;
            while let Some((s, d)) = queue.pop_front() {
                if first.is_none() && !self.invariant_holds(&s) {
                    first = Some(d);
                }
                for t in &self.trans {
                    let keys: Vec<Option<usize>> =
                        if t.param { (0..self.keys).map(Some).collect() } else { vec![None] };
                    for k in keys {
                        if let Some(n) = self.step(t, &s, k) {
                            if seen.insert(n.clone()) {
                                queue.push_back((n, d + 1));
                            }
                        }
                    }
                }
            }
            (first, seen.len())
        }
    }

    fn var_strategy(keys: usize) -> impl Strategy<Value = Var> {
        prop_oneof![
            (0..2i64).prop_map(|b| Var { kind: Kind::Bool, init: b }),
            (1..=3i64).prop_flat_map(|m| (0..=m).prop_map(move |i| Var { kind: Kind::Counter(m), init: i })),
            (0..(1i64 << keys)).prop_map(|mask| Var { kind: Kind::Flags, init: mask }),
        ]
    }

    fn atomic_strategy(vars: Vec<Var>, param: bool) -> BoxedStrategy<Atomic> {
        let n = vars.len();
        (0..n, any::<bool>(), 0..4i64, 0..5usize, any::<bool>())
            .prop_map(move |(v, b, k, c, all)| match vars[v].kind {
                Kind::Bool => Atomic::IsTrue(v, b),
                Kind::Counter(_) => {
                    let cmp = [Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Ge][c];
                    Atomic::Counter(v, cmp, k)
                }
                Kind::Flags if param && !all => Atomic::FlagAt(v, b),
                Kind::Flags => Atomic::AllFlags(v, b),
            })
            .boxed()
    }

    /// Invariant atoms lean towards targets that take several steps to
    /// reach: a counter staying below a bound, flags not all set.
    fn invariant_strategy(vars: Vec<Var>) -> BoxedStrategy<(bool, Atomic)> {
        let n = vars.len();
        (0..n, any::<bool>(), 1..4i64, 0..4usize)
            .prop_map(move |(v, b, k, pick)| match vars[v].kind {
                Kind::Bool => (false, Atomic::IsTrue(v, b)),
                Kind::Counter(_) if pick < 3 => (false, Atomic::Counter(v, Cmp::Lt, k)),
                Kind::Counter(_) => (false, Atomic::Counter(v, Cmp::Ne, k)),
                Kind::Flags if pick < 3 => (true, Atomic::AllFlags(v, true)),
                Kind::Flags => (false, Atomic::AllFlags(v, b)),
            })
            .boxed()
    }

    fn assign_strategy(vars: Vec<Var>, param: bool) -> BoxedStrategy<Option<Assign>> {
        let n = vars.len();
        (0..n, any::<bool>(), 0..4i64)
            .prop_map(move |(v, b, k)| match vars[v].kind {
                Kind::Bool => Some(Assign::SetBool(v, b)),
                Kind::Counter(_) if b || k < 2 => Some(Assign::Inc(v, if k == 3 { 2 } else { 1 })),
                Kind::Counter(_) => Some(Assign::SetCounter(v, k)),
                Kind::Flags if param => Some(Assign::SetFlag(v, b)),
                Kind::Flags => None,
            })
            .boxed()
    }

    fn trans_strategy(vars: Vec<Var>) -> impl Strategy<Value = Trans> {
        any::<bool>().prop_flat_map(move |param| {
            (
                Just(param),
                prop::collection::vec(atomic_strategy(vars.clone(), param), 0..=2),
                prop::collection::vec(assign_strategy(vars.clone(), param), 1..=2),
            )
                .prop_map(|(param, guard, updates)| {
                    let mut seen = Vec::new();
                    let updates = updates
                        .into_iter()
                        .flatten()
                        .filter(|u| {
                            let v = match u {
                                Assign::SetBool(v, _) | Assign::Inc(v, _) | Assign::SetCounter(v, _) | Assign::SetFlag(v, _) => *v,
                            };
                            let fresh = !seen.contains(&v);
                            seen.push(v);
                            fresh
                        })
                        .collect();
                    Trans { param, guard, updates }
                })
        })
    }

    pub fn tiny() -> impl Strategy<Value = Tiny> {
        (1..=3usize)
            .prop_flat_map(|keys| (Just(keys), prop::collection::vec(var_strategy(keys), 1..=4)))
            .prop_flat_map(|(keys, vars)| {
                let inv_atom = prop_oneof![
                    1 => (any::<bool>(), atomic_strategy(vars.clone(), false)),
                    2 => invariant_strategy(vars.clone()),
                ];
                (
                    Just(keys),
                    Just(vars.clone()),
                    prop::collection::vec(trans_strategy(vars.clone()), 1..=5),
                    prop::collection::vec(prop::collection::vec(inv_atom, 1..=2), 1..=2),
                )
            })
            .prop_map(|(keys, vars, trans, invariant)| Tiny { keys, vars, trans, invariant })
    }

    /// Models whose invariant holds initially, so violations need steps.
    pub fn tiny_nontrivial() -> impl Strategy<Value = Tiny> {
        tiny().prop_filter("invariant holds initially", |t| {
            let init: Vec<i64> = t.vars.iter().map(|v| v.init).collect();
            t.invariant_holds(&init)
        })
    }
}
