//! Couples an [`EngineCore`] to an in-process [`BobDevice`] on one virtual
//! clock. Fully deterministic; used for recording traces and in tests.

use chrono::{DateTime, TimeDelta, Utc};

use super::core::{EngineCore, Input, Output};
use super::record::CatchRecord;
use super::state::OperatorDecision;
use super::ui::UiMessage;
use super::SessionError;
use crate::bobproto::{BobDevice, BobMessage, Direction, FrameSource, Trace};
use crate::vision::{DepthProvider, Detector};

#[derive(Debug, Default)]
pub struct CoupledRun {
    pub records: Vec<CatchRecord>,
    pub ui: Vec<UiMessage>,
    /// Wire messages in both directions, on the device clock.
    pub wire: Trace,
    pub finished: bool,
}

pub fn at_ns(epoch: DateTime<Utc>, t_ns: u64) -> DateTime<Utc> {
    epoch + TimeDelta::nanoseconds(t_ns as i64)
}

struct Link<'a, S, D, P> {
    device: &'a mut BobDevice<S>,
    core: &'a mut EngineCore<D, P>,
    epoch: DateTime<Utc>,
    run: CoupledRun,
}

impl<S: FrameSource, D: Detector, P: DepthProvider> Link<'_, S, D, P> {
    fn absorb(&mut self, t: u64, out: Output) {
        self.run.records.extend(out.records);
        self.run.ui.extend(out.to_ui);
        self.run.finished |= out.finished;
        for cmd in out.to_bob {
            self.to_device(t, cmd);
        }
    }

    fn to_device(&mut self, t: u64, msg: BobMessage) {
        self.run.wire.push(t, Direction::In, &msg);
        for reply in self.device.handle(&msg) {
            self.to_core(t, reply);
        }
    }

    fn to_core(&mut self, t: u64, msg: BobMessage) {
        self.run.wire.push(t, Direction::Out, &msg);
        match self.core.handle(at_ns(self.epoch, t), Input::Bob(msg)) {
            Ok(out) => self.absorb(t, out),
            Err(e) => log::warn!("engine rejected a bob message: {e}"),
        }
    }

    fn advance(&mut self, t: u64) -> Result<(), SessionError> {
        for (te, m) in self.device.advance_to(t)? {
            self.to_core(te, m);
        }
        Ok(())
    }
}

/// Runs engine and device from virtual time 0 to `until_ns`. `operator`
/// lists timed UI decisions in time order; `epoch` is the wall-clock time
/// of virtual zero.
pub fn run_coupled<S, D, P>(
    device: &mut BobDevice<S>,
    core: &mut EngineCore<D, P>,
    epoch: DateTime<Utc>,
    operator: &[(u64, OperatorDecision)],
    until_ns: u64,
) -> Result<CoupledRun, SessionError>
where
    S: FrameSource,
    D: Detector,
    P: DepthProvider,
{
    let hello = core.hello();
    let mut link = Link {
        device,
        core,
        epoch,
        run: CoupledRun::default(),
    };
    link.to_device(0, hello);
    let mut ops = operator.iter().peekable();
    loop {
        let timer = link.core.next_timer().map(|t| {
            let ns = (t - epoch).num_nanoseconds().unwrap_or(i64::MAX).max(0);
            ns as u64
        });
        let candidates = [link.device.next_deadline(), ops.peek().map(|(t, _)| *t), timer];
        let Some(t) = candidates.into_iter().flatten().min().filter(|&t| t <= until_ns) else {
            break;
        };
        if link.run.finished {
            break;
        }
        link.advance(t)?;
        if let Some(&&(ot, decision)) = ops.peek() {
            if ot == t {
                ops.next();
                let out = link.core.handle(at_ns(epoch, t), Input::Operator(decision))?;
                link.absorb(t, out);
            }
        }
        if timer == Some(t) {
            let out = link.core.handle(at_ns(epoch, t), Input::Tick)?;
            link.absorb(t, out);
        }
    }
    link.advance(until_ns)?;
    Ok(link.run)
}
