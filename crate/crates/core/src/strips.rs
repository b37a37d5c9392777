//! Grounded STRIPS model: atoms, states, actions, problems.
//!
//! Everything here is a pure value type. Atoms print in the canonical
//! `pred(arg1,arg2)` form (zero-arity atoms print as the bare predicate)
//! and states serialize as the sorted list of those strings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}` (expected lowercase [a-z0-9_-]+)")]
    BadIdentifier(String),
    #[error("cannot parse atom `{0}`")]
    BadAtom(String),
    #[error("action {0} has atoms both added and deleted: {1}")]
    AddDeleteOverlap(String, String),
    #[error("{context} mentions undeclared object `{object}`")]
    UndeclaredObject { context: String, object: String },
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("{0}")]
    Domain(String),
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-')
}

fn check_identifier(s: &str) -> Result<(), ModelError> {
    if is_identifier(s) {
        Ok(())
    } else {
        Err(ModelError::BadIdentifier(s.to_string()))
    }
}

/// A ground predicate instance such as `on(red,blue)` or `handempty`.
///
/// The derived ordering (predicate, then args) agrees with lexicographic
/// ordering of the canonical strings for every valid identifier, because
/// `(` and `,` sort below every identifier byte.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    predicate: String,
    args: Vec<String>,
}

impl Atom {
    pub fn new<P, I, S>(predicate: P, args: I) -> Result<Self, ModelError>
    where
        P: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let predicate = predicate.into();
        check_identifier(&predicate)?;
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        for a in &args {
            check_identifier(a)?;
        }
        Ok(Self { predicate, args })
    }

    /// Constructor for literals known to be well formed (domain code, tests).
    ///
    /// Panics on an invalid identifier.
    pub fn of(predicate: &str, args: &[&str]) -> Self {
        Self::new(predicate, args.iter().copied()).expect("valid atom literal")
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn arg(&self, i: usize) -> Option<&str> {
        self.args.get(i).map(String::as_str)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Atom {
    type Err = ModelError;

    /// Accepts the canonical form; surrounding whitespace and spaces after
    /// commas are tolerated, case is normalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || ModelError::BadAtom(s.to_string());
        match t.find('(') {
            None => Atom::new(t.as_str(), Vec::<String>::new()).map_err(|_| bad()),
            Some(open) => {
                let inner = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
                let args: Vec<String> = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(|a| a.trim().to_string()).collect()
                };
                Atom::new(t[..open].trim(), args).map_err(|_| bad())
            }
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of ground atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            atoms: atoms.into_iter().collect(),
        }
    }

    /// Parses a list of canonical atom strings.
    pub fn parse<I, S>(atoms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        atoms
            .into_iter()
            .map(|a| a.as_ref().parse())
            .collect::<Result<BTreeSet<_>, _>>()
            .map(|atoms| Self { atoms })
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    /// Sorted canonical atom strings.
    pub fn canonical(&self) -> Vec<String> {
        self.atoms.iter().map(ToString::to_string).collect()
    }

    /// Single-string canonical key, e.g. `{clear(a),handempty,ontable(a)}`.
    pub fn key(&self) -> String {
        format!("{{{}}}", self.canonical().join(","))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        Self::new(iter)
    }
}

/// A partial state. The empty goal is satisfied everywhere.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Goal {
    atoms: BTreeSet<Atom>,
}

impl Goal {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Self {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn parse<I, S>(atoms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        State::parse(atoms).map(|s| Self { atoms: s.atoms })
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of goal atoms that hold in `s`.
    pub fn satisfied_count(&self, s: &State) -> usize {
        self.atoms.iter().filter(|a| s.contains(a)).count()
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A fully instantiated action with immutable precondition and effect sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAction {
    name: String,
    args: Vec<String>,
    pre: BTreeSet<Atom>,
    add: BTreeSet<Atom>,
    del: BTreeSet<Atom>,
}

impl GroundAction {
    pub fn new(
        name: impl Into<String>,
        args: Vec<String>,
        pre: impl IntoIterator<Item = Atom>,
        add: impl IntoIterator<Item = Atom>,
        del: impl IntoIterator<Item = Atom>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        check_identifier(&name)?;
        for a in &args {
            check_identifier(a)?;
        }
        let action = Self {
            name,
            args,
            pre: pre.into_iter().collect(),
            add: add.into_iter().collect(),
            del: del.into_iter().collect(),
        };
        let overlap: Vec<String> = action
            .add
            .intersection(&action.del)
            .map(ToString::to_string)
            .collect();
        if !overlap.is_empty() {
            return Err(ModelError::AddDeleteOverlap(
                action.signature(),
                overlap.join(","),
            ));
        }
        Ok(action)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn pre(&self) -> &BTreeSet<Atom> {
        &self.pre
    }

    pub fn add(&self) -> &BTreeSet<Atom> {
        &self.add
    }

    pub fn del(&self) -> &BTreeSet<Atom> {
        &self.del
    }

    /// `name(arg1,arg2)`.
    pub fn signature(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(","))
        }
    }

    /// Canonical sort key.
    pub fn sort_key(&self) -> (&str, &[String]) {
        (&self.name, &self.args)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

impl Serialize for GroundAction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// An ordered action sequence. Cost is its length.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Plan {
    actions: Vec<GroundAction>,
}

impl Plan {
    pub fn new(actions: Vec<GroundAction>) -> Self {
        Self { actions }
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn cost(&self) -> usize {
        self.actions.len()
    }

    pub fn push(&mut self, a: GroundAction) {
        self.actions.push(a);
    }

    /// Returns a new plan with `a` appended.
    pub fn extended(&self, a: GroundAction) -> Self {
        let mut p = self.clone();
        p.push(a);
        p
    }

    pub fn signatures(&self) -> Vec<String> {
        self.actions.iter().map(GroundAction::signature).collect()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.signatures().join(", "))
    }
}

/// Pre(a) ⊆ s.
pub fn applicable(s: &State, a: &GroundAction) -> bool {
    a.pre.iter().all(|p| s.contains(p))
}

/// (s ∖ Del(a)) ∪ Add(a). The caller guarantees applicability; in debug
/// builds a violation panics.
pub fn apply(s: &State, a: &GroundAction) -> State {
    debug_assert!(applicable(s, a), "apply called with inapplicable {a}");
    apply_unchecked(s, a)
}

/// The effect fold without the precondition contract; used to model an
/// unverified world model that trusts every proposal.
pub fn apply_unchecked(s: &State, a: &GroundAction) -> State {
    let mut atoms: BTreeSet<Atom> = s.atoms.difference(&a.del).cloned().collect();
    atoms.extend(a.add.iter().cloned());
    State { atoms }
}

/// G ⊆ s.
pub fn entails(s: &State, g: &Goal) -> bool {
    g.atoms.iter().all(|a| s.contains(a))
}

/// A grounded planning problem over a finite object set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    domain: String,
    objects: BTreeSet<String>,
    actions: Vec<GroundAction>,
    init: State,
    goal: Goal,
}

impl Problem {
    /// Checks object closure and sorts the library canonically.
    pub fn new(
        domain: impl Into<String>,
        objects: impl IntoIterator<Item = String>,
        mut actions: Vec<GroundAction>,
        init: State,
        goal: Goal,
    ) -> Result<Self, ModelError> {
        let objects: BTreeSet<String> = objects.into_iter().collect();
        for o in &objects {
            check_identifier(o)?;
        }
        let check = |context: String, atom: &Atom| -> Result<(), ModelError> {
            match atom.args().iter().find(|x| !objects.contains(*x)) {
                Some(object) => Err(ModelError::UndeclaredObject {
                    context,
                    object: object.clone(),
                }),
                None => Ok(()),
            }
        };
        for a in init.iter() {
            check("init".into(), a)?;
        }
        for a in goal.atoms() {
            check("goal".into(), a)?;
        }
        for act in &actions {
            for a in act.pre().iter().chain(act.add()).chain(act.del()) {
                check(format!("action {act}"), a)?;
            }
            if let Some(object) = act.args().iter().find(|x| !objects.contains(*x)) {
                return Err(ModelError::UndeclaredObject {
                    context: format!("action {act}"),
                    object: object.clone(),
                });
            }
        }
        actions.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        actions.dedup_by(|a, b| a.sort_key() == b.sort_key());
        Ok(Self {
            domain: domain.into(),
            objects,
            actions,
            init,
            goal,
        })
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn objects(&self) -> &BTreeSet<String> {
        &self.objects
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    /// Same objects and library, different endpoints.
    pub fn with_init_goal(&self, init: State, goal: Goal) -> Result<Self, ModelError> {
        Self::new(
            self.domain.clone(),
            self.objects.iter().cloned(),
            self.actions.clone(),
            init,
            goal,
        )
    }

    /// Library lookup by name and arguments.
    pub fn find_action(&self, name: &str, args: &[String]) -> Option<&GroundAction> {
        self.actions
            .binary_search_by(|a| a.sort_key().cmp(&(name, args)))
            .ok()
            .map(|i| &self.actions[i])
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            objects: self.objects.iter().cloned().collect(),
            init: self.init.canonical(),
            goal: self.goal.atoms().iter().map(ToString::to_string).collect(),
            domain: self.domain.clone(),
        }
    }
}

/// All library actions applicable in `s`, in canonical (name, args) order.
pub fn applicable_actions<'p>(s: &State, p: &'p Problem) -> Vec<&'p GroundAction> {
    p.actions().iter().filter(|a| applicable(s, a)).collect()
}

/// On-disk problem description; actions are grounded from `domain`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub objects: Vec<String>,
    pub init: Vec<String>,
    pub goal: Vec<String>,
    pub domain: String,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem, ModelError> {
        match self.domain.as_str() {
            "blocksworld" => {
                let init = State::parse(&self.init)?;
                let goal = Goal::parse(&self.goal)?;
                crate::blocksworld::problem(&self.objects, init, goal)
                    .map_err(|e| ModelError::Domain(e.to_string()))
            }
            other => Err(ModelError::UnknownDomain(other.to_string())),
        }
    }
}
