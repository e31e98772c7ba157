//! Manager loop: relays the protocol decisions of [`ManagerProtocol`] to the
//! workers over a [`ManagerLink`].

use log::{debug, warn};

use super::protocol::{Control, ManagerAction, ManagerProtocol};
use super::transport::ManagerLink;
use super::EngineError;

/// Drives the workers to termination and returns the number of supersteps
/// in which some worker computed.
pub fn run_manager<L: ManagerLink>(link: &mut L, max_supersteps: u64) -> Result<u64, EngineError> {
    let k = link.num_workers();
    let mut proto = ManagerProtocol::new(k, max_supersteps);
    let start = proto.start();
    dispatch(link, &start)?;
    loop {
        let c = match link.recv() {
            Ok(c) => c,
            Err(e) => {
                abort_all(link, &e.to_string());
                return Err(e);
            }
        };
        if let Control::Abort { worker, reason } = &c {
            warn!("worker {worker:?} aborted: {reason}");
            abort_all(link, reason);
            return Err(EngineError::Aborted(reason.clone()));
        }
        match proto.on_control(c) {
            Ok(ManagerAction::Wait) => {}
            Ok(action @ ManagerAction::Resume { .. }) => dispatch(link, &action)?,
            Ok(action @ ManagerAction::Terminate { .. }) => {
                dispatch(link, &action)?;
                debug!("terminated after {} computing supersteps", proto.last_sync());
                return Ok(proto.last_sync());
            }
            Err(e) => {
                abort_all(link, &e.to_string());
                return Err(EngineError::Protocol(e));
            }
        }
    }
}

fn dispatch<L: ManagerLink>(link: &mut L, action: &ManagerAction) -> Result<(), EngineError> {
    match action {
        ManagerAction::Wait => Ok(()),
        ManagerAction::Resume { superstep, expected } => {
            for (w, &e) in expected.iter().enumerate() {
                link.send(
                    w,
                    Control::Resume {
                        superstep: *superstep,
                        expected: e,
                    },
                )?;
            }
            Ok(())
        }
        ManagerAction::Terminate { superstep } => {
            for w in 0..link.num_workers() {
                link.send(w, Control::Terminate { superstep: *superstep })?;
            }
            Ok(())
        }
    }
}

fn abort_all<L: ManagerLink>(link: &mut L, reason: &str) {
    for w in 0..link.num_workers() {
        let _ = link.send(
            w,
            Control::Abort {
                worker: None,
                reason: reason.to_string(),
            },
        );
    }
}
