use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread::{self, JoinHandle};

use super::eve::Eve;
use super::frame::{Frame, FrameError};

/// A reliable, ordered frame channel to the peer.
pub trait Transport {
    fn send(&mut self, frame: &Frame) -> Result<(), FrameError>;
    fn recv(&mut self) -> Result<Frame, FrameError>;
}

/// Frames over any byte stream.
#[derive(Debug)]
pub struct StreamTransport<R, W> {
    reader: R,
    writer: W,
}

impl<R: Read, W: Write> StreamTransport<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        StreamTransport { reader, writer }
    }

    pub fn into_parts(self) -> (R, W) {
        (self.reader, self.writer)
    }
}

impl<R: Read, W: Write> Transport for StreamTransport<R, W> {
    fn send(&mut self, frame: &Frame) -> Result<(), FrameError> {
        frame.write_to(&mut self.writer)
    }

    fn recv(&mut self) -> Result<Frame, FrameError> {
        Frame::read_from(&mut self.reader)
    }
}

pub type TcpTransport = StreamTransport<BufReader<TcpStream>, BufWriter<TcpStream>>;

pub fn tcp_transport(stream: TcpStream) -> io::Result<TcpTransport> {
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    Ok(StreamTransport::new(reader, BufWriter::new(stream)))
}

/// Reading half of an in-process byte pipe.
#[derive(Debug)]
pub struct PipeReader {
    rx: Receiver<Vec<u8>>,
    buf: Vec<u8>,
    pos: usize,
}

/// Writing half of an in-process byte pipe. Dropping it signals end of stream.
#[derive(Debug, Clone)]
pub struct PipeWriter {
    tx: Sender<Vec<u8>>,
}

pub fn pipe() -> (PipeWriter, PipeReader) {
    let (tx, rx) = channel();
    (
        PipeWriter { tx },
        PipeReader {
            rx,
            buf: Vec::new(),
            pos: 0,
        },
    )
}

impl Read for PipeReader {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if out.is_empty() {
            return Ok(0);
        }
        while self.pos == self.buf.len() {
            match self.rx.recv() {
                Ok(chunk) => {
                    self.buf = chunk;
                    self.pos = 0;
                }
                Err(_) => return Ok(0),
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for PipeWriter {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        if !data.is_empty() {
            self.tx
                .send(data.to_vec())
                .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer hung up"))?;
        }
        Ok(data.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub type PipeTransport = StreamTransport<PipeReader, PipeWriter>;

/// Two connected in-process endpoints.
pub fn duplex() -> (PipeTransport, PipeTransport) {
    let (a_w, b_r) = pipe();
    let (b_w, a_r) = pipe();
    (StreamTransport::new(a_r, a_w), StreamTransport::new(b_r, b_w))
}

/// Relay threads of an Eve proxy; join to get Eve back once both sides hang up.
#[derive(Debug)]
pub struct EveProxy {
    downstream: JoinHandle<Eve>,
    upstream: JoinHandle<()>,
}

impl EveProxy {
    pub fn join(self) -> Eve {
        let eve = self.downstream.join().expect("eve relay panicked");
        self.upstream.join().expect("eve relay panicked");
        eve
    }
}

/// Splices Eve between the master-facing and slave-facing streams: frames
/// from master to slave go through [`Eve::tap`], frames back pass unchanged.
pub fn attach_eve<R1, W1, R2, W2>(
    master_side: StreamTransport<R1, W1>,
    slave_side: StreamTransport<R2, W2>,
    mut eve: Eve,
) -> EveProxy
where
    R1: Read + Send + 'static,
    W1: Write + Send + 'static,
    R2: Read + Send + 'static,
    W2: Write + Send + 'static,
{
    let (mut from_master, mut to_master) = master_side.into_parts();
    let (mut from_slave, mut to_slave) = slave_side.into_parts();
    let downstream = thread::spawn(move || {
        while let Ok(f) = Frame::read_from(&mut from_master) {
            if eve.tap(f).write_to(&mut to_slave).is_err() {
                break;
            }
        }
        eve
    });
    let upstream = thread::spawn(move || {
        while let Ok(f) = Frame::read_from(&mut from_slave) {
            if f.write_to(&mut to_master).is_err() {
                break;
            }
        }
    });
    EveProxy { downstream, upstream }
}
