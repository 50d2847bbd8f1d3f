import json
from extensions import db
from datetime import datetime
from sqlalchemy import Text, Integer, String, DateTime, Float

class ExperimentRun(db.Model):
    __tablename__ = 'experiment_runs'

    id = db.Column(Integer, primary_key=True)
    experiment_id = db.Column(String(255), nullable=False)
    kind = db.Column(String(50), nullable=False)  # solve, picard, verify
    suite = db.Column(String(50), nullable=True)
    run_dir = db.Column(String(500), nullable=True)
    config_json = db.Column(Text, nullable=False)
    created_date = db.Column(DateTime, default=datetime.utcnow)
    status = db.Column(String(50), default='pending')  # pending, processing, completed, failed
    error_message = db.Column(Text, nullable=True)
    elapsed_seconds = db.Column(Float, nullable=True)

    reports = db.relationship('CaseReportRecord', backref='run', cascade='all, delete-orphan')

    @property
    def config(self):
        return json.loads(self.config_json)

class CaseReportRecord(db.Model):
    __tablename__ = 'case_reports'

    id = db.Column(Integer, primary_key=True)
    run_id = db.Column(Integer, db.ForeignKey('experiment_runs.id'), nullable=False)
    criterion = db.Column(String(100), nullable=False)
    verdict = db.Column(String(20), nullable=False)  # pass, fail, inconclusive, rejected
    measured_json = db.Column(Text, nullable=False)
    provenance = db.Column(Text, nullable=True)
    created_date = db.Column(DateTime, default=datetime.utcnow)
