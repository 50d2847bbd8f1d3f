from flask_sqlalchemy import SQLAlchemy
from sqlalchemy.orm import DeclarativeBase


class Base(DeclarativeBase):
    pass


# Run registry; experiments themselves never need it.
db = SQLAlchemy(model_class=Base)
