//! Task networks: compound tasks, methods and primitive tasks stored in an
//! arena and linked by id, so recursive networks are representable and the
//! whole network stays encodable.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::ActionBlock;
use crate::beliefs::Conditions;

use super::effect::Effect;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompoundId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimitiveId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskRef {
    Compound(CompoundId),
    Primitive(PrimitiveId),
}

impl From<CompoundId> for TaskRef {
    fn from(id: CompoundId) -> Self {
        TaskRef::Compound(id)
    }
}

impl From<PrimitiveId> for TaskRef {
    fn from(id: PrimitiveId) -> Self {
        TaskRef::Primitive(id)
    }
}

/// Points at one method of one compound task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodRef {
    pub compound: CompoundId,
    pub index: usize,
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}#{}", self.compound.0, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("no compound task {0:?}")]
    UnknownCompound(CompoundId),
    #[error("no primitive task {0:?}")]
    UnknownPrimitive(PrimitiveId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Method {
    pub name: String,
    pub conditions: Conditions,
    pub subtasks: Vec<TaskRef>,
    /// Blocks planned anywhere under this method are merged into one.
    pub append: bool,
}

impl Method {
    pub fn new(name: impl Into<String>) -> Self {
        Method {
            name: name.into(),
            conditions: Conditions::new(),
            subtasks: Vec::new(),
            append: false,
        }
    }

    pub fn when(mut self, conditions: Conditions) -> Self {
        self.conditions = conditions;
        self
    }

    pub fn subtask(mut self, task: impl Into<TaskRef>) -> Self {
        self.subtasks.push(task.into());
        self
    }

    pub fn appending(mut self) -> Self {
        self.append = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompoundTask {
    pub name: String,
    pub methods: Vec<Method>,
    pub parent: Option<MethodRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveTask {
    pub name: String,
    pub preconditions: Conditions,
    pub effects: Vec<Effect>,
    pub block: ActionBlock,
}

impl PrimitiveTask {
    pub fn new(name: impl Into<String>, block: ActionBlock) -> Self {
        PrimitiveTask {
            name: name.into(),
            preconditions: Conditions::new(),
            effects: Vec::new(),
            block,
        }
    }

    pub fn when(mut self, preconditions: Conditions) -> Self {
        self.preconditions = preconditions;
        self
    }

    pub fn effect(mut self, effect: Effect) -> Self {
        self.effects.push(effect);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskNetwork {
    compounds: Vec<CompoundTask>,
    primitives: Vec<PrimitiveTask>,
}

fn insert_at<T>(v: &mut Vec<T>, item: T, index: Option<usize>, what: &'static str) -> Result<usize, NetworkError> {
    let at = index.unwrap_or(v.len());
    if at > v.len() {
        return Err(NetworkError::IndexOutOfRange {
            what,
            index: at,
            len: v.len(),
        });
    }
    v.insert(at, item);
    Ok(at)
}

fn remove_at<T>(v: &mut Vec<T>, index: usize, what: &'static str) -> Result<T, NetworkError> {
    if index >= v.len() {
        return Err(NetworkError::IndexOutOfRange {
            what,
            index,
            len: v.len(),
        });
    }
    Ok(v.remove(index))
}

impl TaskNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_compound(&mut self, name: impl Into<String>) -> CompoundId {
        self.compounds.push(CompoundTask {
            name: name.into(),
            methods: Vec::new(),
            parent: None,
        });
        CompoundId(self.compounds.len() as u32 - 1)
    }

    pub fn add_primitive(&mut self, task: PrimitiveTask) -> PrimitiveId {
        self.primitives.push(task);
        PrimitiveId(self.primitives.len() as u32 - 1)
    }

    pub fn compound(&self, id: CompoundId) -> Result<&CompoundTask, NetworkError> {
        self.compounds
            .get(id.0 as usize)
            .ok_or(NetworkError::UnknownCompound(id))
    }

    fn compound_mut(&mut self, id: CompoundId) -> Result<&mut CompoundTask, NetworkError> {
        self.compounds
            .get_mut(id.0 as usize)
            .ok_or(NetworkError::UnknownCompound(id))
    }

    pub fn primitive(&self, id: PrimitiveId) -> Result<&PrimitiveTask, NetworkError> {
        self.primitives
            .get(id.0 as usize)
            .ok_or(NetworkError::UnknownPrimitive(id))
    }

    pub fn primitive_mut(&mut self, id: PrimitiveId) -> Result<&mut PrimitiveTask, NetworkError> {
        self.primitives
            .get_mut(id.0 as usize)
            .ok_or(NetworkError::UnknownPrimitive(id))
    }

    pub fn method(&self, m: MethodRef) -> Result<&Method, NetworkError> {
        let ct = self.compound(m.compound)?;
        ct.methods.get(m.index).ok_or(NetworkError::IndexOutOfRange {
            what: "methods",
            index: m.index,
            len: ct.methods.len(),
        })
    }

    pub fn compounds(&self) -> impl Iterator<Item = (CompoundId, &CompoundTask)> {
        self.compounds
            .iter()
            .enumerate()
            .map(|(i, c)| (CompoundId(i as u32), c))
    }

    pub fn primitives(&self) -> impl Iterator<Item = (PrimitiveId, &PrimitiveTask)> {
        self.primitives
            .iter()
            .enumerate()
            .map(|(i, p)| (PrimitiveId(i as u32), p))
    }

    pub fn task_count(&self) -> usize {
        self.compounds.len() + self.primitives.len()
    }

    /// Inserts `method` at `index`, or at the end when no index is given.
    /// Returns the position it landed at.
    pub fn add_method(
        &mut self,
        compound: CompoundId,
        method: Method,
        index: Option<usize>,
    ) -> Result<usize, NetworkError> {
        for t in &method.subtasks {
            self.check_ref(*t)?;
        }
        let children: Vec<CompoundId> = method
            .subtasks
            .iter()
            .filter_map(|t| match t {
                TaskRef::Compound(c) => Some(*c),
                TaskRef::Primitive(_) => None,
            })
            .collect();
        let at = insert_at(&mut self.compound_mut(compound)?.methods, method, index, "methods")?;
        for c in children {
            self.adopt(c, MethodRef { compound, index: at });
        }
        Ok(at)
    }

    pub fn remove_method(&mut self, compound: CompoundId, index: usize) -> Result<Method, NetworkError> {
        remove_at(&mut self.compound_mut(compound)?.methods, index, "methods")
    }

    pub fn add_subtask(
        &mut self,
        method: MethodRef,
        task: impl Into<TaskRef>,
        index: Option<usize>,
    ) -> Result<usize, NetworkError> {
        let task = task.into();
        self.check_ref(task)?;
        self.method(method)?;
        let m = &mut self.compound_mut(method.compound)?.methods[method.index];
        let at = insert_at(&mut m.subtasks, task, index, "subtasks")?;
        if let TaskRef::Compound(c) = task {
            self.adopt(c, method);
        }
        Ok(at)
    }

    pub fn remove_subtask(&mut self, method: MethodRef, index: usize) -> Result<TaskRef, NetworkError> {
        self.method(method)?;
        let m = &mut self.compound_mut(method.compound)?.methods[method.index];
        remove_at(&mut m.subtasks, index, "subtasks")
    }

    // First owner wins; shared subtrees keep their original parent.
    fn adopt(&mut self, child: CompoundId, parent: MethodRef) {
        if let Ok(c) = self.compound_mut(child) {
            if c.parent.is_none() && child != parent.compound {
                c.parent = Some(parent);
            }
        }
    }

    fn check_ref(&self, t: TaskRef) -> Result<(), NetworkError> {
        match t {
            TaskRef::Compound(c) => self.compound(c).map(|_| ()),
            TaskRef::Primitive(p) => self.primitive(p).map(|_| ()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(net: &TaskNetwork, c: CompoundId) -> Vec<String> {
        net.compound(c).unwrap().methods.iter().map(|m| m.name.clone()).collect()
    }

    #[test]
    fn add_method_without_index_appends() {
        let mut net = TaskNetwork::new();
        let c = net.add_compound("root");
        net.add_method(c, Method::new("a"), None).unwrap();
        net.add_method(c, Method::new("b"), None).unwrap();
        assert_eq!(names(&net, c), ["a", "b"]);
    }

    #[test]
    fn add_method_at_zero_prepends() {
        let mut net = TaskNetwork::new();
        let c = net.add_compound("root");
        net.add_method(c, Method::new("a"), None).unwrap();
        net.add_method(c, Method::new("z"), Some(0)).unwrap();
        assert_eq!(names(&net, c), ["z", "a"]);
    }

    #[test]
    fn remove_then_reinsert_restores_order() {
        let mut net = TaskNetwork::new();
        let c = net.add_compound("root");
        for n in ["a", "b", "c"] {
            net.add_method(c, Method::new(n), None).unwrap();
        }
        let before = names(&net, c);
        let m = net.remove_method(c, 1).unwrap();
        assert_eq!(names(&net, c), ["a", "c"]);
        net.add_method(c, m, Some(1)).unwrap();
        assert_eq!(names(&net, c), before);
    }

    #[test]
    fn out_of_range_indices() {
        let mut net = TaskNetwork::new();
        let c = net.add_compound("root");
        assert!(matches!(
            net.add_method(c, Method::new("a"), Some(1)),
            Err(NetworkError::IndexOutOfRange { .. })
        ));
        assert!(net.remove_method(c, 0).is_err());
        net.add_method(c, Method::new("a"), None).unwrap();
        let m = MethodRef { compound: c, index: 0 };
        let p = net.add_primitive(PrimitiveTask::new("p", ActionBlock::new()));
        assert!(net.add_subtask(m, p, Some(2)).is_err());
        assert!(net.remove_subtask(m, 0).is_err());
        assert!(net.add_subtask(m, PrimitiveId(9), None).is_err());
    }

    #[test]
    fn subtasks_ordered_and_parent_recorded() {
        let mut net = TaskNetwork::new();
        let root = net.add_compound("root");
        let child = net.add_compound("child");
        let p = net.add_primitive(PrimitiveTask::new("p", ActionBlock::new()));
        net.add_method(root, Method::new("m"), None).unwrap();
        let m = MethodRef { compound: root, index: 0 };
        net.add_subtask(m, p, None).unwrap();
        net.add_subtask(m, child, Some(0)).unwrap();
        assert_eq!(
            net.method(m).unwrap().subtasks,
            vec![TaskRef::Compound(child), TaskRef::Primitive(p)]
        );
        assert_eq!(net.compound(child).unwrap().parent, Some(m));
        assert_eq!(net.remove_subtask(m, 0).unwrap(), TaskRef::Compound(child));
    }
}
