import os
import logging

from extensions import db
from flask import Flask, jsonify
from werkzeug.middleware.proxy_fix import ProxyFix

# Configure logging
logging.basicConfig(
    level=os.environ.get("LOG_LEVEL", "INFO").upper(),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

def create_app(test_config=None):
    app = Flask(__name__)
    app.secret_key = os.environ.get("SESSION_SECRET", "dev-secret-key-change-in-production")
    app.wsgi_app = ProxyFix(app.wsgi_app, x_proto=1, x_host=1)

    # Run registry
    app.config["SQLALCHEMY_DATABASE_URI"] = os.environ.get("DATABASE_URL", "sqlite:////tmp/lans_runs.db")
    app.config["SQLALCHEMY_ENGINE_OPTIONS"] = {
        "pool_recycle": 300,
        "pool_pre_ping": True,
    }
    app.config["RUNS_ROOT"] = os.environ.get("LANS_RUNS_ROOT", "runs")
    if test_config:
        app.config.update(test_config)

    os.makedirs(app.config["RUNS_ROOT"], exist_ok=True)

    # Initialize extensions
    db.init_app(app)

    with app.app_context():
        # Import models to ensure tables are created
        import models
        db.create_all()

        # Register blueprints
        from routes.runs import runs_bp
        from routes.status import status_bp

        app.register_blueprint(runs_bp)
        app.register_blueprint(status_bp)

        # Main route
        @app.route('/')
        def index():
            return jsonify({
                'service': 'lans-alpha-lab',
                'endpoints': ['/api/runs', '/api/runs/<id>', '/api/runs/<id>/report',
                              '/api/stats', '/system/status'],
            })

    return app


if __name__ == "__main__":
    app = create_app()
    port = int(os.environ.get("PORT", 8080))
    logging.getLogger(__name__).info(f"Starting results browser on http://0.0.0.0:{port}")
    app.run(host="0.0.0.0", port=port, debug=False)
