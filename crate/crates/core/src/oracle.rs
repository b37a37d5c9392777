//! Exact breadth-first planning over small grounded problems.
//!
//! Problems are compiled to 128-bit atom masks; a 6-block blocksworld has
//! 49 atoms and 7057 reachable states, so whole-space tables are cheap.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Mutex;

use thiserror::Error;

use crate::strips::{Atom, Goal, GroundAction, Plan, Problem, State};

pub const MAX_OBJECTS: usize = 6;
pub const MAX_ENUMERATION_OBJECTS: usize = 5;
/// Bound on on-demand searches from states outside the precomputed table.
const ON_DEMAND_LIMIT: usize = 500_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle supports at most {limit} objects, problem has {got}")]
    TooManyObjects { got: usize, limit: usize },
    #[error("problem mentions {0} distinct atoms; the oracle supports 128")]
    TooManyAtoms(usize),
    #[error(transparent)]
    Model(#[from] crate::strips::ModelError),
}

type Mask = u128;

#[derive(Debug, Clone)]
struct Compiled {
    index: HashMap<Atom, u32>,
    atoms: Vec<Atom>,
    pre: Vec<Mask>,
    add: Vec<Mask>,
    del: Vec<Mask>,
}

impl Compiled {
    fn new(p: &Problem) -> Result<Self, OracleError> {
        let mut index = HashMap::new();
        let mut atoms = Vec::new();
        let mut intern = |a: &Atom| {
            if !index.contains_key(a) {
                index.insert(a.clone(), atoms.len() as u32);
                atoms.push(a.clone());
            }
        };
        for a in p.init().iter().chain(p.goal().atoms()) {
            intern(a);
        }
        for act in p.actions() {
            for a in act.pre().iter().chain(act.add()).chain(act.del()) {
                intern(a);
            }
        }
        if atoms.len() > 128 {
            return Err(OracleError::TooManyAtoms(atoms.len()));
        }
        let mut c = Self {
            index,
            atoms,
            pre: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
        };
        for act in p.actions() {
            let pre = c.mask(act.pre().iter());
            let add = c.mask(act.add().iter());
            let del = c.mask(act.del().iter());
            c.pre.push(pre);
            c.add.push(add);
            c.del.push(del);
        }
        Ok(c)
    }

    /// Atoms unknown to the problem are dropped; no action or goal can
    /// observe them.
    fn mask<'a>(&self, atoms: impl Iterator<Item = &'a Atom>) -> Mask {
        atoms
            .filter_map(|a| self.index.get(a))
            .fold(0, |m, &i| m | (1u128 << i))
    }

    fn decode(&self, m: Mask) -> State {
        State::new(
            (0..self.atoms.len())
                .filter(|i| m & (1u128 << i) != 0)
                .map(|i| self.atoms[i].clone()),
        )
    }

    fn successors(&self, m: Mask) -> impl Iterator<Item = (usize, Mask)> + '_ {
        (0..self.pre.len())
            .filter(move |&i| m & self.pre[i] == self.pre[i])
            .map(move |i| (i, (m & !self.del[i]) | self.add[i]))
    }
}

fn guard(p: &Problem, limit: usize) -> Result<(), OracleError> {
    if p.objects().len() > limit {
        return Err(OracleError::TooManyObjects {
            got: p.objects().len(),
            limit,
        });
    }
    Ok(())
}

/// Forward BFS with parent links; returns the plan to the first goal state
/// dequeued, expanding actions in canonical order.
fn bfs_plan(c: &Compiled, p: &Problem, start: Mask, goal: Mask) -> Option<Plan> {
    let mut parent: HashMap<Mask, Option<(Mask, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(start, None);
    queue.push_back(start);
    while let Some(m) = queue.pop_front() {
        if m & goal == goal {
            let mut actions = Vec::new();
            let mut cur = m;
            while let Some(Some((prev, a))) = parent.get(&cur) {
                actions.push(p.actions()[*a].clone());
                cur = *prev;
            }
            actions.reverse();
            return Some(Plan::new(actions));
        }
        for (a, next) in c.successors(m) {
            parent.entry(next).or_insert_with(|| {
                queue.push_back(next);
                Some((m, a))
            });
        }
    }
    None
}

/// A shortest plan from `p.init` to the goal, or `None` if unreachable.
pub fn solve_optimal(p: &Problem) -> Result<Option<Plan>, OracleError> {
    guard(p, MAX_OBJECTS)?;
    let c = Compiled::new(p)?;
    let start = c.mask(p.init().iter());
    let goal = c.mask(p.goal().atoms().iter());
    Ok(bfs_plan(&c, p, start, goal))
}

/// Shortest plan length from `s` to any state entailing `g`.
pub fn distance(s: &State, g: &Goal, p: &Problem) -> Result<Option<usize>, OracleError> {
    let p = p.with_init_goal(s.clone(), g.clone())?;
    Ok(solve_optimal(&p)?.map(|plan| plan.len()))
}

/// The canonical all-on-table, hand-empty state over `p`'s objects.
pub fn all_on_table(p: &Problem) -> State {
    let mut atoms = vec![Atom::of("handempty", &[])];
    for o in p.objects() {
        atoms.push(Atom::of("ontable", &[o]));
        atoms.push(Atom::of("clear", &[o]));
    }
    State::new(atoms)
}

fn reachable_masks(c: &Compiled, start: Mask) -> Vec<Mask> {
    let mut seen: HashMap<Mask, usize> = HashMap::new();
    let mut order = vec![start];
    seen.insert(start, 0);
    let mut head = 0;
    while head < order.len() {
        let m = order[head];
        head += 1;
        for (_, next) in c.successors(m) {
            if let Entry::Vacant(e) = seen.entry(next) {
                e.insert(order.len());
                order.push(next);
            }
        }
    }
    order
}

/// Number of states reachable from the all-on-table start.
pub fn enumerate_reachable(p: &Problem) -> Result<usize, OracleError> {
    guard(p, MAX_ENUMERATION_OBJECTS)?;
    let c = Compiled::new(p)?;
    Ok(reachable_masks(&c, c.mask(all_on_table(p).iter())).len())
}

/// All states reachable from the all-on-table start, in BFS order.
pub fn reachable_states(p: &Problem) -> Result<Vec<State>, OracleError> {
    guard(p, MAX_ENUMERATION_OBJECTS)?;
    let c = Compiled::new(p)?;
    Ok(reachable_masks(&c, c.mask(all_on_table(p).iter()))
        .into_iter()
        .map(|m| c.decode(m))
        .collect())
}

/// Forward BFS layers from one initial state; answers optimal plan lengths
/// for many goals over the same objects without re-searching.
#[derive(Debug, Clone)]
pub struct ForwardDistances {
    compiled: Compiled,
    /// States in BFS order with their depth.
    layers: Vec<(Mask, u32)>,
}

impl ForwardDistances {
    /// Explores everything reachable from `p.init` (the goal is ignored).
    pub fn new(p: &Problem) -> Result<Self, OracleError> {
        guard(p, MAX_OBJECTS)?;
        let compiled = Compiled::new(p)?;
        let start = compiled.mask(p.init().iter());
        let mut depth: HashMap<Mask, u32> = HashMap::new();
        let mut layers = vec![(start, 0)];
        depth.insert(start, 0);
        let mut head = 0;
        while head < layers.len() {
            let (m, d) = layers[head];
            head += 1;
            for (_, next) in compiled.successors(m) {
                if let Entry::Vacant(e) = depth.entry(next) {
                    e.insert(d + 1);
                    layers.push((next, d + 1));
                }
            }
        }
        Ok(Self { compiled, layers })
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Length of a shortest plan to `g`; `None` if unreachable or if `g`
    /// mentions atoms no reachable state can hold.
    pub fn optimal_length(&self, g: &Goal) -> Option<usize> {
        if g.atoms().iter().any(|a| !self.compiled.index.contains_key(a)) {
            return None;
        }
        let goal = self.compiled.mask(g.atoms().iter());
        self.layers
            .iter()
            .find(|&&(m, _)| m & goal == goal)
            .map(|&(_, d)| d as usize)
    }
}

/// Distance-to-goal table for one problem, shared by the oracle-backed
/// agents.
///
/// Every state reachable from the initial state is solved up front by a
/// backward BFS from the goal states; other states (e.g. from an unchecked
/// world model) are solved on demand and memoized.
#[derive(Debug)]
pub struct Oracle {
    problem: Problem,
    compiled: Compiled,
    goal: Mask,
    table: HashMap<Mask, u32>,
    /// Reachable from init but with no path to the goal.
    dead: HashSet<Mask>,
    extra: Mutex<HashMap<Mask, Option<u32>>>,
}

impl Oracle {
    pub fn new(p: &Problem) -> Result<Self, OracleError> {
        guard(p, MAX_OBJECTS)?;
        let compiled = Compiled::new(p)?;
        let goal = compiled.mask(p.goal().atoms().iter());
        let states = reachable_masks(&compiled, compiled.mask(p.init().iter()));
        let id: HashMap<Mask, usize> = states.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
        for (i, &m) in states.iter().enumerate() {
            for (_, next) in compiled.successors(m) {
                reverse[id[&next]].push(i);
            }
        }
        let mut dist = vec![u32::MAX; states.len()];
        let mut queue = VecDeque::new();
        for (i, &m) in states.iter().enumerate() {
            if m & goal == goal {
                dist[i] = 0;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &reverse[i] {
                if dist[j] == u32::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        let mut table = HashMap::new();
        let mut dead = HashSet::new();
        for (&m, &d) in states.iter().zip(&dist) {
            if d == u32::MAX {
                dead.insert(m);
            } else {
                table.insert(m, d);
            }
        }
        Ok(Self {
            problem: p.clone(),
            compiled,
            goal,
            table,
            dead,
            extra: Mutex::new(HashMap::new()),
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    fn mask_distance(&self, m: Mask) -> Option<u32> {
        if let Some(&d) = self.table.get(&m) {
            return Some(d);
        }
        if m & self.goal == self.goal {
            return Some(0);
        }
        if self.dead.contains(&m) {
            return None;
        }
        let mut cache = self.extra.lock().expect("oracle cache poisoned");
        if let Some(&d) = cache.get(&m) {
            return d;
        }
        let d = self.search_from(m);
        cache.insert(m, d);
        d
    }

    /// BFS from an unseen state. Table states are closed under successors,
    /// so the search stops at them and takes the best `depth + table
    /// distance` found before the frontier depth exceeds it.
    fn search_from(&self, start: Mask) -> Option<u32> {
        let mut seen: HashMap<Mask, u32> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut best: Option<u32> = None;
        seen.insert(start, 0);
        queue.push_back(start);
        while let Some(m) = queue.pop_front() {
            let d = seen[&m];
            if best.is_some_and(|b| d >= b) {
                break;
            }
            if m & self.goal == self.goal {
                best = Some(best.map_or(d, |b| b.min(d)));
                continue;
            }
            if let Some(&rest) = self.table.get(&m) {
                best = Some(best.map_or(d + rest, |b| b.min(d + rest)));
                continue;
            }
            if self.dead.contains(&m) {
                continue;
            }
            if seen.len() > ON_DEMAND_LIMIT {
                break;
            }
            for (_, next) in self.compiled.successors(m) {
                if let Entry::Vacant(e) = seen.entry(next) {
                    e.insert(d + 1);
                    queue.push_back(next);
                }
            }
        }
        best
    }

    /// Shortest distance from `s` to the problem goal; `None` if unreachable.
    pub fn distance(&self, s: &State) -> Option<usize> {
        self.mask_distance(self.compiled.mask(s.iter()))
            .map(|d| d as usize)
    }

    /// Applicable library actions that start an optimal continuation, in
    /// canonical order.
    pub fn optimal_actions(&self, s: &State) -> Vec<&GroundAction> {
        let m = self.compiled.mask(s.iter());
        let Some(d) = self.mask_distance(m) else {
            return Vec::new();
        };
        if d == 0 {
            return Vec::new();
        }
        self.compiled
            .successors(m)
            .filter(|&(_, next)| self.mask_distance(next) == Some(d - 1))
            .map(|(i, _)| &self.problem.actions()[i])
            .collect()
    }

    /// Applicable actions in canonical order, each with the distance of its
    /// successor.
    pub fn successor_distances(&self, s: &State) -> Vec<(&GroundAction, Option<usize>)> {
        let m = self.compiled.mask(s.iter());
        self.compiled
            .successors(m)
            .map(|(i, next)| {
                (
                    &self.problem.actions()[i],
                    self.mask_distance(next).map(|d| d as usize),
                )
            })
            .collect()
    }

    /// Number of states in the precomputed table.
    pub fn table_len(&self) -> usize {
        self.table.len()
    }
}
