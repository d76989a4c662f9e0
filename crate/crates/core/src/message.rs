//! Messages, performatives and agent mailboxes.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentId, State};
use crate::beliefs::BeliefSet;

/// Either an agent or the simulation controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Address {
    Agent(AgentId),
    Controller,
}

impl Address {
    pub fn agent(&self) -> Option<AgentId> {
        match self {
            Address::Agent(id) => Some(*id),
            Address::Controller => None,
        }
    }
}

impl From<AgentId> for Address {
    fn from(id: AgentId) -> Self {
        Address::Agent(id)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Address::Agent(id) => write!(f, "{id}"),
            Address::Controller => f.write_str("controller"),
        }
    }
}

/// FIPA ACL speech-act tags, plus the requests understood by the controller.
///
/// Performatives are advisory labels; the engine only interprets the
/// controller requests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Performative {
    Propose,
    AcceptProposal,
    RejectProposal,
    Inform,
    QueryFf,
    Request,
    Agree,
    Refuse,
    /// Controller request: retire the sending agent.
    Finished,
    /// Controller request: print `content["print"]`.
    Print,
    /// Controller request: stop the run after the current step.
    Stop,
    /// Controller request: spawn a new agent.
    Agent,
}

impl Performative {
    pub const ALL: [Performative; 12] = [
        Performative::Propose,
        Performative::AcceptProposal,
        Performative::RejectProposal,
        Performative::Inform,
        Performative::QueryFf,
        Performative::Request,
        Performative::Agree,
        Performative::Refuse,
        Performative::Finished,
        Performative::Print,
        Performative::Stop,
        Performative::Agent,
    ];

    pub fn is_controller_request(self) -> bool {
        matches!(
            self,
            Performative::Finished | Performative::Print | Performative::Stop | Performative::Agent
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Propose => "propose",
            Performative::AcceptProposal => "accept-proposal",
            Performative::RejectProposal => "reject-proposal",
            Performative::Inform => "inform",
            Performative::QueryFf => "query-ff",
            Performative::Request => "request",
            Performative::Agree => "agree",
            Performative::Refuse => "refuse",
            Performative::Finished => "finished",
            Performative::Print => "print",
            Performative::Stop => "stop",
            Performative::Agent => "agent",
        }
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown performative {0:?}")]
pub struct UnknownPerformative(pub String);

impl FromStr for Performative {
    type Err = UnknownPerformative;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Performative::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownPerformative(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MessageError {
    #[error("no reply address: message was sent by the controller")]
    NoReplyAddress,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: Address,
    pub receiver: Address,
    pub performative: Performative,
    pub content: BeliefSet,
    pub priority: bool,
}

impl Message {
    pub fn new(
        sender: impl Into<Address>,
        receiver: impl Into<Address>,
        performative: Performative,
        content: BeliefSet,
    ) -> Self {
        Message {
            sender: sender.into(),
            receiver: receiver.into(),
            performative,
            content,
            priority: false,
        }
    }

    pub fn with_priority(mut self, priority: bool) -> Self {
        self.priority = priority;
        self
    }

    /// Builds a reply addressed back to the sender. The reply carries only
    /// the given content and is never prioritised.
    pub fn reply(&self, performative: Performative, content: BeliefSet) -> Result<Message, MessageError> {
        if self.sender == Address::Controller {
            return Err(MessageError::NoReplyAddress);
        }
        Ok(Message {
            sender: self.receiver,
            receiver: self.sender,
            performative,
            content,
            priority: false,
        })
    }
}

/// One mailbox entry: user traffic or the agent's own detached state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mail {
    State(Box<State>),
    Message(Message),
}

/// An agent inbox. Prioritised messages go to the head, everything else to
/// the tail.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Mailbox {
    entries: VecDeque<Mail>,
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn deliver(&mut self, message: Message) {
        if message.priority {
            self.entries.push_front(Mail::Message(message));
        } else {
            self.entries.push_back(Mail::Message(message));
        }
    }

    /// Places the agent's state in the mailbox, replacing any previous one.
    pub fn put_state(&mut self, state: State) {
        self.entries.retain(|m| !matches!(m, Mail::State(_)));
        self.entries.push_front(Mail::State(Box::new(state)));
    }

    pub fn state(&self) -> Option<&State> {
        self.entries.iter().find_map(|m| match m {
            Mail::State(s) => Some(s.as_ref()),
            Mail::Message(_) => None,
        })
    }

    pub fn messages(&self) -> impl Iterator<Item = &Message> {
        self.entries.iter().filter_map(|m| match m {
            Mail::Message(msg) => Some(msg),
            Mail::State(_) => None,
        })
    }

    pub fn message_count(&self) -> usize {
        self.messages().count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Empties the mailbox, returning its entries in order.
    pub fn drain(&mut self) -> Vec<Mail> {
        self.entries.drain(..).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Mail> {
        self.entries.iter()
    }
}
