"""Top-level worker functions for multi-process race tests."""

from __future__ import annotations

from pictoforge.bus import EventLog
from pictoforge.errors import RepoError
from pictoforge.repository import RepoStore


def try_lock(args) -> bool:
    """Attempt one lock acquisition after a barrier; True if this process won."""
    root, holder, barrier = args
    barrier.wait()
    try:
        RepoStore(root).lock(holder)
        return True
    except RepoError as e:
        assert e.code == "BUSY"
        return False


def lock_race_worker(root: str, holder: str, rounds: int, barrier, wins) -> None:
    """Contend for the lock `rounds` times; the winner of a round unlocks it."""
    store = RepoStore(root)
    for i in range(rounds):
        barrier.wait()
        won = False
        try:
            store.lock(holder)
            won = True
        except RepoError as e:
            assert e.code == "BUSY"
        barrier.wait()  # both attempted; safe to count and reset
        if won:
            wins.put((i, holder))
            store.unlock(holder)
        barrier.wait()  # lock released; next round may start
    del barrier


def emit_worker(log_path: str, who: str, count: int, barrier) -> None:
    """Emit `count` events as fast as possible, starting together."""
    log = EventLog(log_path)
    barrier.wait()
    for i in range(count):
        log.emit("SESSION_ENDED", subject=f"{who}-{i}", payload={"who": who})
