from sqlalchemy import Column, Integer, String, DateTime, Float, Boolean, UniqueConstraint
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func
import uuid

Base = declarative_base()


class ModelInstanceRecord(Base):
    """
    One trained network (or the single PBM instance) of the experiment
    """
    __tablename__ = "model_instances"
    __table_args__ = (UniqueConstraint("model_type", "instance", name="uq_model_type_instance"),)

    id = Column(String, primary_key=True, default=lambda: str(uuid.uuid4()))
    model_type = Column(String(50), nullable=False, index=True)
    instance = Column(Integer, nullable=False)

    # Training setup
    seed = Column(Integer, nullable=True)
    l1_lambda = Column(Float, nullable=True)
    target_kind = Column(String(50), nullable=True)  # StateDerivative, Residual

    # Outcome
    final_train_loss = Column(Float, nullable=True)
    final_validation_loss = Column(Float, nullable=True)
    l0_count = Column(Integer, nullable=True)
    l1_norm = Column(Float, nullable=True)
    pruned_fraction = Column(Float, nullable=True)

    path = Column(String(500), nullable=True)

    created_at = Column(DateTime, default=func.now())
    updated_at = Column(DateTime, default=func.now(), onupdate=func.now())

    def __repr__(self):
        return f"<ModelInstanceRecord(model_type='{self.model_type}', instance={self.instance}, l0={self.l0_count})>"


class ForecastRun(Base):
    """
    AN-RFMSE and blow-up flag of one (model instance, test trajectory, horizon)
    """
    __tablename__ = "forecast_runs"

    id = Column(String, primary_key=True, default=lambda: str(uuid.uuid4()))
    master_seed = Column(Integer, nullable=False, index=True)
    model_type = Column(String(50), nullable=False, index=True)
    instance = Column(Integer, nullable=False)
    trajectory = Column(Integer, nullable=False)
    horizon = Column(Integer, nullable=False, index=True)

    an_rfmse = Column(Float, nullable=True)  # NULL when the forecast went non-finite
    blowup = Column(Boolean, default=False)

    created_at = Column(DateTime, default=func.now())

    def __repr__(self):
        return (f"<ForecastRun(model_type='{self.model_type}', instance={self.instance}, "
                f"trajectory={self.trajectory}, horizon={self.horizon}, blowup={self.blowup})>")
