from typing import Any, Dict, Iterable, Optional

from sqlalchemy import case, func
from sqlalchemy.orm import Session

from .models import ForecastRun, ModelInstanceRecord
from ..utils import get_logger

logger = get_logger(__name__)


class BaseCRUD:
    """Base class for CRUD operations"""

    def __init__(self, model):
        self.model = model

    def create(self, db: Session, **kwargs) -> Any:
        """Create a new record"""
        try:
            db_obj = self.model(**kwargs)
            db.add(db_obj)
            db.commit()
            db.refresh(db_obj)
            logger.debug(f"Created {self.model.__name__} with id: {db_obj.id}")
            return db_obj
        except Exception as e:
            logger.error(f"Error creating {self.model.__name__}: {e}")
            db.rollback()
            raise


class ModelInstanceCRUD(BaseCRUD):
    """CRUD operations for trained model instances"""

    def __init__(self):
        super().__init__(ModelInstanceRecord)

    def get_by_key(self, db: Session, model_type: str, instance: int) -> Optional[ModelInstanceRecord]:
        return db.query(ModelInstanceRecord).filter(
            ModelInstanceRecord.model_type == model_type,
            ModelInstanceRecord.instance == instance
        ).first()

    def upsert(self, db: Session, model_type: str, instance: int, **kwargs) -> ModelInstanceRecord:
        """Create the (type, instance) record or overwrite the existing one"""
        try:
            db_obj = self.get_by_key(db, model_type, instance)
            if db_obj is None:
                return self.create(db, model_type=model_type, instance=instance, **kwargs)
            for key, value in kwargs.items():
                if hasattr(db_obj, key):
                    setattr(db_obj, key, value)
            db.commit()
            db.refresh(db_obj)
            logger.debug(f"Updated {model_type} instance {instance}")
            return db_obj
        except Exception as e:
            logger.error(f"Error recording {model_type} instance {instance}: {e}")
            db.rollback()
            raise

    def sparsity_by_type(self, db: Session) -> Dict[str, Dict[str, float]]:
        """Instance count, mean l0 count and mean l1 norm per model type"""
        rows = db.query(
            ModelInstanceRecord.model_type,
            func.count(ModelInstanceRecord.id),
            func.avg(ModelInstanceRecord.l0_count),
            func.avg(ModelInstanceRecord.l1_norm)
        ).group_by(ModelInstanceRecord.model_type).all()
        return {
            model_type: {"instances": count, "mean_l0": float(l0 or 0), "mean_l1": float(l1 or 0)}
            for model_type, count, l0, l1 in rows
        }


class ForecastRunCRUD(BaseCRUD):
    """CRUD operations for per-run forecast results"""

    def __init__(self):
        super().__init__(ForecastRun)

    def replace_for_seed(self, db: Session, master_seed: int, records: Iterable[Dict[str, Any]]) -> int:
        """Drop earlier results of ``master_seed`` and insert ``records`` in one transaction"""
        try:
            db.query(ForecastRun).filter(ForecastRun.master_seed == master_seed).delete()
            rows = [ForecastRun(master_seed=master_seed, **r) for r in records]
            db.add_all(rows)
            db.commit()
            logger.info(f"Recorded {len(rows)} forecast runs for seed {master_seed}")
            return len(rows)
        except Exception as e:
            logger.error(f"Error recording forecast runs: {e}")
            db.rollback()
            raise

    def get_statistics(self, db: Session, master_seed: int) -> Dict[str, Dict[int, Dict[str, float]]]:
        """Run count, blow-up rate and mean AN-RFMSE (blow-ups excluded) per type and horizon"""
        rows = db.query(
            ForecastRun.model_type,
            ForecastRun.horizon,
            func.count(ForecastRun.id),
            func.sum(case((ForecastRun.blowup == True, 1), else_=0)),  # noqa: E712
        ).filter(ForecastRun.master_seed == master_seed).group_by(
            ForecastRun.model_type, ForecastRun.horizon
        ).all()
        means = dict(
            ((model_type, horizon), value) for model_type, horizon, value in db.query(
                ForecastRun.model_type,
                ForecastRun.horizon,
                func.avg(ForecastRun.an_rfmse),
            ).filter(
                ForecastRun.master_seed == master_seed,
                ForecastRun.blowup == False  # noqa: E712
            ).group_by(ForecastRun.model_type, ForecastRun.horizon).all()
        )

        stats: Dict[str, Dict[int, Dict[str, float]]] = {}
        for model_type, horizon, total, blowups in rows:
            blowups = int(blowups or 0)
            stats.setdefault(model_type, {})[horizon] = {
                "runs": total,
                "blowups": blowups,
                "blowup_rate": blowups / total if total > 0 else 0.0,
                "mean_an_rfmse": means.get((model_type, horizon)),
            }
        return stats
