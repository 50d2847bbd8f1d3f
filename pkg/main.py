import os

from app import create_app
from cli import cli

if __name__ == "__main__":
    if os.environ.get("LANS_SERVE"):
        app = create_app()
        port = int(os.environ.get("PORT", 8080))
        app.run(host="0.0.0.0", port=port, debug=False)
    else:
        cli()
