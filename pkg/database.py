import json
import logging
from datetime import datetime
from typing import Optional, Sequence

from sqlalchemy import Column, DateTime, Integer, String, Text, UniqueConstraint, create_engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool

from config import settings

logger = logging.getLogger(__name__)


def _create_engine(url: str):
    """In-memory sqlite shares one connection so the survey worker threads see the same tables."""
    if url.startswith("sqlite") and (":memory:" in url or url == "sqlite://"):
        return create_engine(url, echo=False, poolclass=StaticPool,
                             connect_args={"check_same_thread": False})
    return create_engine(url, echo=False)


engine = _create_engine(settings.database_url)
SessionLocal = sessionmaker(bind=engine)
Base = declarative_base()


def faces_key(faces: Sequence) -> str:
    """
    Cache key of a torus survey: the reduced face functions in order.

    Two cones with the same face functions mod p have identical counts and
    identical rank failures, so the key ignores the cone itself.

    Examples:
        (y^4 + x^2*y^2, x) over F_5 -> "5|2|x^2*y^2 + y^4;x"
    """
    p = faces[0].p
    nvars = faces[0].nvars
    return f"{p}|{nvars}|" + ";".join(face.to_text() for face in faces)


class CountRecord(Base):
    __tablename__ = "count_records"
    __table_args__ = (UniqueConstraint("faces_key", name="uq_count_records_faces_key"),)

    id = Column(Integer, primary_key=True)
    prime = Column(Integer, nullable=False, index=True)
    nvars = Column(Integer, nullable=False)
    faces_key = Column(String, nullable=False)
    counts_json = Column(Text, nullable=False)  # list of counts indexed by bitmask
    witnesses_json = Column(Text, nullable=False, default="[]")  # [[subset, point, rank], ...]
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f"<CountRecord p={self.prime} {self.faces_key}>"


def configure_engine(url: str):
    """Point the cache at another database (tests use sqlite:///:memory:)."""
    global engine
    engine = _create_engine(url)
    SessionLocal.configure(bind=engine)
    return engine


def init_db():
    """Create all tables."""
    Base.metadata.create_all(engine)


def get_session():
    """Get a database session."""
    return SessionLocal()


def load_survey(key: str) -> Optional[tuple[list[int], list]]:
    """(counts, witness rows) stored under key, or None."""
    session = get_session()
    try:
        record = session.query(CountRecord).filter(CountRecord.faces_key == key).first()
        if record is None:
            return None
        return json.loads(record.counts_json), json.loads(record.witnesses_json)
    except SQLAlchemyError as e:
        logger.warning(f"Count cache lookup failed: {e}")
        return None
    finally:
        session.close()


def store_survey(key: str, prime: int, nvars: int, counts: Sequence[int], witnesses: Sequence) -> bool:
    session = get_session()
    try:
        if session.query(CountRecord).filter(CountRecord.faces_key == key).first():
            return False
        session.add(CountRecord(
            prime=prime,
            nvars=nvars,
            faces_key=key,
            counts_json=json.dumps(list(counts)),
            witnesses_json=json.dumps([list(w) for w in witnesses]),
        ))
        session.commit()
        return True
    except SQLAlchemyError as e:
        session.rollback()
        logger.warning(f"Count cache write failed: {e}")
        return False
    finally:
        session.close()


def clear_cache() -> int:
    """Delete every cached survey; returns the number removed."""
    session = get_session()
    try:
        count = session.query(CountRecord).delete()
        session.commit()
        logger.info(f"Removed {count} cached surveys")
        return count
    finally:
        session.close()
