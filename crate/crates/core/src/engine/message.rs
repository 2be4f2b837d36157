/// Payload of one message exchanged between neighboring agents.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundMessage<S> {
    /// Sender's current value.
    Assignment(usize),
    /// Sender's best-response improvement.
    Gain(S),
    /// Sender penalizes the shared constraint this round.
    Sync(usize),
    /// Algorithm-specific numeric vector (max-sum tables, MGM2 offers). Opaque to the engine.
    Payload(Vec<S>),
}

impl<S> RoundMessage<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            RoundMessage::Assignment(_) => "assignment",
            RoundMessage::Gain(_) => "gain",
            RoundMessage::Sync(_) => "sync",
            RoundMessage::Payload(_) => "payload",
        }
    }
}

/// A message in flight, stamped with the round and phase it was sent in.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<S> {
    pub from: usize,
    pub to: usize,
    pub round: usize,
    pub phase: usize,
    pub message: RoundMessage<S>,
}
