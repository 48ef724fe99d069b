//! Two-party negotiation: BB84 over simulated quantum frames, key
//! confirmation and parameter agreement on the classical channel, then
//! encrypted data transfer.
//!
//! The endpoints are the state machines in [`protocol`]. [`run_master`] and
//! [`run_slave`] drive them over a blocking [`Transport`]; [`run_lockstep`]
//! drives both in one thread through a single FIFO, which makes transcripts
//! reproducible.

mod eve;
mod frame;
mod protocol;
mod transcript;
mod transport;

use std::collections::VecDeque;

pub use eve::{Eve, EveConfig, TapScope};
pub use frame::{Frame, FrameError, Tag, MAX_FRAME};
pub use protocol::{
    digest64, key_digest, AbortReason, Master, MasterConfig, Outcome, Phase, Role, SessionParams, SessionSummary,
    Slave, SlaveConfig, CONFIRM_BITS, PROTOCOL_VERSION,
};
pub use transcript::{Direction, Transcript, TranscriptError, TranscriptLine};
pub use transport::{
    attach_eve, duplex, pipe, tcp_transport, EveProxy, PipeReader, PipeTransport, PipeWriter, StreamTransport,
    TcpTransport, Transport,
};

/// Any state machine that reacts to inbound frames.
trait Endpoint {
    fn handle(&mut self, frame: Frame) -> Vec<Frame>;
    fn is_finished(&self) -> bool;
}

impl Endpoint for Master {
    fn handle(&mut self, frame: Frame) -> Vec<Frame> {
        Master::handle(self, frame)
    }
    fn is_finished(&self) -> bool {
        Master::is_finished(self)
    }
}

impl Endpoint for Slave {
    fn handle(&mut self, frame: Frame) -> Vec<Frame> {
        Slave::handle(self, frame)
    }
    fn is_finished(&self) -> bool {
        Slave::is_finished(self)
    }
}

fn drive<T: Transport, E: Endpoint>(
    transport: &mut T,
    endpoint: &mut E,
    first: Vec<Frame>,
    out_dir: Direction,
    mut transcript: Option<&mut Transcript>,
) -> Result<(), FrameError> {
    let in_dir = match out_dir {
        Direction::MasterToSlave => Direction::SlaveToMaster,
        Direction::SlaveToMaster => Direction::MasterToSlave,
    };
    let mut pending = first;
    loop {
        for f in pending.drain(..) {
            if let Some(t) = transcript.as_deref_mut() {
                t.record(out_dir, &f);
            }
            transport.send(&f)?;
        }
        if endpoint.is_finished() {
            return Ok(());
        }
        let f = transport.recv()?;
        if let Some(t) = transcript.as_deref_mut() {
            t.record(in_dir, &f);
        }
        pending = endpoint.handle(f);
    }
}

/// Runs the master to completion. A transport failure is returned as an
/// error; protocol aborts are reported in the summary's outcome.
pub fn run_master<T: Transport>(
    transport: &mut T,
    cfg: MasterConfig,
    transcript: Option<&mut Transcript>,
) -> Result<SessionSummary, FrameError> {
    let mut m = Master::new(cfg);
    let first = m.start();
    drive(transport, &mut m, first, Direction::MasterToSlave, transcript)?;
    Ok(m.summary().clone())
}

pub fn run_slave<T: Transport>(
    transport: &mut T,
    cfg: SlaveConfig,
    transcript: Option<&mut Transcript>,
) -> Result<SessionSummary, FrameError> {
    let mut s = Slave::new(cfg);
    drive(transport, &mut s, Vec::new(), Direction::SlaveToMaster, transcript)?;
    Ok(s.summary().clone())
}

#[derive(Debug, Clone)]
pub struct LockstepRun {
    pub master: SessionSummary,
    pub slave: SessionSummary,
    pub transcript: Transcript,
    /// Qubits Eve measured and resent, if she was present.
    pub intercepted: Option<usize>,
}

impl LockstepRun {
    pub fn keys_agree(&self) -> bool {
        self.master.completed() && self.slave.completed() && self.master.key == self.slave.key
    }

    pub fn mutual_abort(&self) -> bool {
        self.master.aborted() && self.slave.aborted()
    }
}

/// Runs both endpoints in one thread. Frames go through the wire encoding and
/// a single FIFO, so the resulting transcript depends only on the seeds.
pub fn run_lockstep(master: MasterConfig, slave: SlaveConfig, eve: Option<EveConfig>) -> LockstepRun {
    let mut m = Master::new(master);
    let mut s = Slave::new(slave);
    let mut eve = eve.map(Eve::new);
    let mut transcript = Transcript::new();
    let mut queue: VecDeque<(Direction, Frame)> =
        m.start().into_iter().map(|f| (Direction::MasterToSlave, f)).collect();

    while let Some((dir, frame)) = queue.pop_front() {
        let frame = Frame::read_from(&mut &frame.encode()[..]).expect("locally encoded frame decodes");
        let frame = match (dir, eve.as_mut()) {
            (Direction::MasterToSlave, Some(e)) => e.tap(frame),
            _ => frame,
        };
        transcript.record(dir, &frame);
        let (replies, back) = match dir {
            Direction::MasterToSlave => (s.handle(frame), Direction::SlaveToMaster),
            Direction::SlaveToMaster => (m.handle(frame), Direction::MasterToSlave),
        };
        queue.extend(replies.into_iter().map(|f| (back, f)));
    }

    LockstepRun {
        master: m.summary().clone(),
        slave: s.summary().clone(),
        transcript,
        intercepted: eve.map(|e| e.intercepted()),
    }
}
