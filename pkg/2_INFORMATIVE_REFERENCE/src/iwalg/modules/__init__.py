from .module import IwasawaModule, Presentation, StandardForm
