//! TCP front end: one thread and one isolated session per connection.

use super::protocol::{run_protocol, Connection};
use super::{EnvConfig, EnvError, Policy};
use std::io::{BufReader, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

const POLL: Duration = Duration::from_millis(20);

pub struct Server {
    listener: TcpListener,
}

impl Server {
    pub fn bind(addr: &str) -> Result<Server, EnvError> {
        let fail = |e: std::io::Error| EnvError::BindFailure {
            addr: addr.to_string(),
            reason: e.to_string(),
        };
        let listener = TcpListener::bind(addr).map_err(fail)?;
        listener.set_nonblocking(true).map_err(fail)?;
        Ok(Server { listener })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    /// Accepts connections until `shutdown` is raised, then waits for every
    /// connection to finish the requests it has already received.
    pub fn run(self, policy: Arc<dyn Policy>, cfg: EnvConfig, shutdown: Arc<AtomicBool>) -> std::io::Result<()> {
        cfg.validate().map_err(|e| std::io::Error::new(ErrorKind::InvalidInput, e.to_string()))?;
        log::info!("listening on {}", self.local_addr());
        let mut workers = Vec::new();
        while !shutdown.load(Ordering::SeqCst) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    let (policy, shutdown) = (Arc::clone(&policy), Arc::clone(&shutdown));
                    workers.push(thread::spawn(move || serve_stream(stream, peer, policy.as_ref(), cfg, &shutdown)));
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL),
                Err(e) => log::warn!("accept failed: {e}"),
            }
            workers.retain(|w| !w.is_finished());
        }
        for w in workers {
            let _ = w.join();
        }
        log::info!("server stopped");
        Ok(())
    }
}

fn serve_stream(stream: TcpStream, peer: SocketAddr, policy: &dyn Policy, cfg: EnvConfig, shutdown: &AtomicBool) {
    log::info!("connection from {peer}");
    let setup = stream
        .set_nonblocking(false)
        .and_then(|_| stream.set_read_timeout(Some(POLL)))
        .and_then(|_| stream.try_clone());
    let writer = match setup {
        Ok(w) => w,
        Err(e) => {
            log::warn!("{peer}: {e}");
            return;
        }
    };
    let mut conn = Connection::new(policy, cfg);
    if let Err(e) = run_protocol(BufReader::new(stream), writer, &mut conn, Some(shutdown), None) {
        log::info!("{peer}: connection dropped ({e})");
    }
    log::info!("{peer}: closed");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Request, Response};
    use crate::oracle::Oracle;
    use std::io::{BufRead, Write};

    #[test]
    fn serves_and_shuts_down() {
        let server = Server::bind("127.0.0.1:0").unwrap();
        let addr = server.local_addr();
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let stop = Arc::clone(&stop);
            thread::spawn(move || server.run(Arc::new(Oracle::default()), EnvConfig::default(), stop))
        };
        let mut s = TcpStream::connect(addr).unwrap();
        let mut r = BufReader::new(s.try_clone().unwrap());
        let req = serde_json::to_string(&Request::Reset { seed: Some(1), goal: None }).unwrap();
        writeln!(s, "{req}").unwrap();
        let mut line = String::new();
        r.read_line(&mut line).unwrap();
        assert!(matches!(serde_json::from_str(&line).unwrap(), Response::EldMove(_)));
        drop((s, r));
        stop.store(true, Ordering::SeqCst);
        handle.join().unwrap().unwrap();
    }

    #[test]
    fn bind_failure_is_reported() {
        let first = Server::bind("127.0.0.1:0").unwrap();
        let taken = first.local_addr().to_string();
        assert!(matches!(Server::bind(&taken), Err(EnvError::BindFailure { .. })));
    }
}
