use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread;

use tungstenite::{accept, Error as WsError, Message};

use super::Connection;

/// WebSocket endpoint; each accepted connection gets its own thread and
/// [`Connection`].
pub struct Server {
    listener: TcpListener,
    cap: usize,
    base: PathBuf,
}

impl Server {
    pub fn bind(addr: impl std::net::ToSocketAddrs, cap: usize) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            cap,
            base: PathBuf::from("."),
        })
    }

    /// Directory that relative mesh paths in `load_scene` resolve against.
    pub fn with_base(mut self, base: impl Into<PathBuf>) -> Self {
        self.base = base.into();
        self
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let conn = Connection::new(self.cap).with_base(self.base.clone());
            thread::spawn(move || {
                if let Err(e) = handle(stream, conn) {
                    eprintln!("connection closed: {e}");
                }
            });
        }
        Ok(())
    }

    /// Serves on a background thread and returns the bound address.
    pub fn spawn(self) -> io::Result<SocketAddr> {
        let addr = self.local_addr()?;
        thread::spawn(move || self.run());
        Ok(addr)
    }
}

fn handle(stream: TcpStream, mut conn: Connection) -> Result<(), WsError> {
    let mut ws = accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => WsError::ConnectionClosed,
    })?;
    loop {
        match ws.read() {
            Ok(Message::Text(t)) => {
                let reply = conn.handle_text(t.as_str());
                ws.send(Message::text(reply))?;
            }
            Ok(Message::Binary(_)) => {
                let reply = super::protocol::encode(&super::ServerMessage::error("binary frames are not supported"));
                ws.send(Message::text(reply))?;
            }
            Ok(Message::Close(_)) | Err(WsError::ConnectionClosed) | Err(WsError::AlreadyClosed) => return Ok(()),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
}

/// Binds `addr` and serves forever.
pub fn serve(addr: impl std::net::ToSocketAddrs, cap: usize) -> io::Result<()> {
    Server::bind(addr, cap)?.run()
}
