/// What an Ack acknowledges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acked {
    Handshake,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Handshake,
    Ack { to: usize, of: Acked },
    Data,
}

/// A frame on the acoustic channel.
///
/// For Data, `source_id` and `sequence` identify the end-to-end packet. A
/// Handshake uses `sequence` as its round token; an Ack copies the
/// `source_id` and `sequence` of what it acknowledges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub kind: PacketKind,
    pub source_id: usize,
    pub sender_id: usize,
    pub designated_forwarder_id: Option<usize>,
    pub payload_bytes: u32,
    pub sequence: u64,
    pub birth_time: f64,
    pub hop_count: u32,
    /// Depth of the sender when it transmitted, meters.
    pub sender_depth: f64,
    /// Residual over initial energy of the sender.
    pub sender_energy_ratio: f64,
}

impl Packet {
    pub fn is_data(&self) -> bool {
        matches!(self.kind, PacketKind::Data)
    }

    /// End-to-end identity of a data packet.
    pub fn key(&self) -> (usize, u64) {
        (self.source_id, self.sequence)
    }
}
