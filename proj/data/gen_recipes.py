#!/usr/bin/env python3
"""Writes the bundled synthetic recipe corpus (recipes.jsonl).

Every recipe is produced from templates with a fixed seed, so rerunning the
script reproduces the file byte for byte. A handful of deliberately
low-quality records are appended to exercise the preprocessing filters.
"""
import json
import random

rng = random.Random(20200420)

QTY = ["1", "2", "3", "1/2", "1/4", "3/4", "1 1/2", "½", "¼", "2-3", "1.5", "4"]


def qty(units):
    return f"{rng.choice(QTY)} {rng.choice(units)}"


def pick(pool, n):
    return rng.sample(pool, n)


recipes = []


def emit(title, ingredients, steps):
    recipes.append({"title": title, "ingredients": ingredients, "instructions": " ".join(steps)})


PROTEINS = {
    "chicken": "1 pound boneless chicken breast, cut into strips",
    "beef": "1 pound flank steak beef, thinly sliced",
    "pork": "1 pound pork tenderloin, sliced",
    "shrimp": "1 pound large shrimp, peeled and deveined",
    "tofu": "1 (14 ounce) package firm tofu, cubed",
    "turkey": "1 pound ground turkey",
}
STIRFRY_VEG = {
    "broccoli": "2 cups broccoli florets",
    "pepper": "1 red bell pepper, sliced",
    "carrot": "2 carrots, julienned",
    "mushroom": "1 cup sliced mushrooms",
    "onion": "1 onion, sliced",
    "zucchini": "1 zucchini, halved and sliced",
    "cabbage": "2 cups shredded cabbage",
    "pea": "1 cup snow peas",
}
FLAVORS = {
    "Garlic": ("garlic", "4 cloves garlic, minced"),
    "Ginger": ("ginger", "1 tablespoon grated fresh ginger"),
    "Honey": ("honey", "2 tablespoons honey"),
    "Sesame": ("sesame", "1 tablespoon sesame seeds"),
    "Spicy": ("chili", "1 teaspoon chili flakes"),
    "Lemon": ("lemon", "1 lemon, juiced"),
    "Orange": ("orange", "1 orange, juiced"),
}
for flavor, (fnoun, fline) in FLAVORS.items():
    for protein, pline in PROTEINS.items():
        v1, v2 = pick(list(STIRFRY_VEG), 2)
        mins = rng.choice([4, 5, 6, 7, 8])
        ingr = [pline, STIRFRY_VEG[v1], STIRFRY_VEG[v2], fline,
                "3 tablespoons soy sauce", "1 tablespoon vegetable oil"]
        if rng.random() < 0.5:
            ingr.append("1 teaspoon cornstarch")
        steps = [
            f"Heat the oil in a large skillet or wok over high heat.",
            f"Add the {protein} and cook for {mins} minutes until browned.",
            f"Stir in the {v1} and {v2} and cook for 3 minutes.",
            f"Whisk together the soy sauce and {fnoun} in a small bowl.",
            f"Pour the sauce over the {protein} and toss to coat.",
            "Serve hot over rice.",
        ]
        emit(f"{flavor} {protein.capitalize()} Stir Fry", ingr, steps)

SOUP_BASES = {
    "Creamy": ("cream", "1 cup heavy cream"),
    "Rustic": ("bean", "1 (15 ounce) can white beans, drained"),
    "Spiced": ("cumin", "1 teaspoon ground cumin"),
    "Hearty": ("potato", "2 potatoes, peeled and diced"),
    "Golden": ("turmeric", "1 teaspoon turmeric"),
}
SOUP_VEG = ["tomato", "carrot", "pumpkin", "mushroom", "lentil", "leek", "cauliflower", "squash", "pea", "corn"]
SOUP_VEG_LINE = {
    "tomato": "6 ripe tomatoes, chopped",
    "carrot": "5 carrots, peeled and chopped",
    "pumpkin": "3 cups pumpkin puree",
    "mushroom": "1 pound mushrooms, sliced",
    "lentil": "1 cup red lentils, rinsed",
    "leek": "3 leeks, sliced",
    "cauliflower": "1 head cauliflower, chopped",
    "squash": "1 butternut squash, cubed",
    "pea": "3 cups frozen peas",
    "corn": "4 cups corn kernels",
}
for adj, (bnoun, bline) in SOUP_BASES.items():
    for veg in SOUP_VEG:
        simmer = rng.choice([15, 20, 25, 30])
        herb = rng.choice(["thyme", "parsley", "basil", "dill"])
        ingr = [SOUP_VEG_LINE[veg], bline, "1 onion, diced", "2 cloves garlic, minced",
                "4 cups vegetable broth", "2 tablespoons butter", f"1 teaspoon dried {herb}",
                "salt and pepper to taste"]
        steps = [
            "Melt the butter in a large pot over medium heat.",
            "Add the onion and garlic and cook until soft, about 5 minutes.",
            f"Stir in the {veg} and the {herb}.",
            f"Pour in the broth and bring to a boil.",
            f"Reduce the heat and simmer for {simmer} minutes.",
            f"Stir in the {bnoun} and puree the soup with a blender until smooth.",
            "Season with salt and pepper and serve warm.",
        ]
        emit(f"{adj} {veg.capitalize()} Soup", ingr, steps)

SALAD_GREENS = {"spinach": "4 cups baby spinach", "arugula": "4 cups arugula",
                "kale": "1 bunch kale, stems removed", "lettuce": "1 head romaine lettuce, chopped"}
SALAD_TOPS = {
    "strawberry": "1 cup sliced strawberries",
    "apple": "1 apple, thinly sliced",
    "pear": "1 pear, cored and sliced",
    "walnut": "1/2 cup toasted walnuts",
    "feta": "1/2 cup crumbled feta cheese",
    "cucumber": "1 cucumber, sliced",
    "avocado": "1 ripe avocado, diced",
    "tomato": "1 cup cherry tomatoes, halved",
    "almond": "1/3 cup sliced almonds",
    "cranberry": "1/4 cup dried cranberries",
}
DRESS = {"Balsamic": ("vinegar", "2 tablespoons balsamic vinegar"),
         "Lemon": ("lemon", "1 lemon, juiced"),
         "Honey Mustard": ("mustard", "1 tablespoon dijon mustard"),
         "Lime": ("lime", "1 lime, juiced")}
for green, gline in SALAD_GREENS.items():
    for dname, (dnoun, dline) in DRESS.items():
        used = set()
        while len(used) < 2:
            t1, t2 = pick(list(SALAD_TOPS), 2)
            if frozenset((t1, t2)) in used:
                continue
            used.add(frozenset((t1, t2)))
            ingr = [gline, SALAD_TOPS[t1], SALAD_TOPS[t2], dline, "3 tablespoons extra virgin olive oil",
                    "1 pinch salt"]
            steps = [
                f"Place the {green} in a large salad bowl.",
                f"Scatter the {t1} and {t2} over the {green}.",
                f"Whisk the oil with the {dnoun} and a pinch of salt in a small bowl.",
                "Drizzle the dressing over the salad and toss gently to combine.",
                "Serve immediately.",
            ]
            emit(f"{t1.capitalize()} {t2.capitalize()} {green.capitalize()} Salad with {dname} Dressing",
                 ingr, steps)

PASTA = {"spaghetti": "1 pound spaghetti", "penne": "1 pound penne pasta",
         "linguine": "12 ounces linguine", "rigatoni": "1 pound rigatoni"}
PASTA_SAUCE = {
    "Tomato Basil": (["tomato", "basil"], ["1 (28 ounce) can crushed tomatoes", "1/4 cup fresh basil leaves, torn"]),
    "Garlic Butter": (["butter", "garlic"], ["4 tablespoons butter", "6 cloves garlic, minced"]),
    "Pesto": (["pesto", "parmesan"], ["1/2 cup basil pesto", "1/2 cup grated parmesan cheese"]),
    "Lemon Ricotta": (["ricotta", "lemon"], ["1 cup ricotta cheese", "1 lemon, zested and juiced"]),
    "Spinach Alfredo": (["spinach", "cream"], ["2 cups fresh spinach", "1 cup heavy cream"]),
    "Mushroom": (["mushroom", "thyme"], ["8 ounces cremini mushrooms, sliced", "1 teaspoon fresh thyme"]),
}
for pasta, pline in PASTA.items():
    for sname, (nouns, lines) in PASTA_SAUCE.items():
        extra = rng.choice(["chicken", "shrimp", "sausage", "pea"])
        eline = {"chicken": "2 cooked chicken breasts, sliced", "shrimp": "1/2 pound shrimp, peeled",
                 "sausage": "2 italian sausages, casings removed", "pea": "1 cup frozen peas"}[extra]
        mins = rng.choice([8, 9, 10, 11, 12])
        ingr = [pline] + lines + [eline, "2 tablespoons olive oil", "salt to taste"]
        steps = [
            f"Bring a large pot of salted water to a boil and cook the {pasta} for {mins} minutes.",
            "Drain the pasta and reserve a cup of the cooking water.",
            f"Heat the oil in a skillet and cook the {extra} until done.",
            f"Add the {nouns[0]} and {nouns[1]} and stir for 2 minutes.",
            f"Toss the {pasta} with the sauce, adding pasta water as needed.",
            "Season with salt and serve at once.",
        ]
        emit(f"{sname} {pasta.capitalize()} with {extra.capitalize()}", ingr, steps)

BAKED = {
    "Muffins": ("muffin tin", 20, "375"),
    "Cookies": ("baking sheet", 12, "350"),
    "Bread": ("loaf pan", 55, "350"),
    "Bars": ("square baking dish", 30, "350"),
}
BAKE_FLAVOR = {
    "Blueberry": ("blueberry", "1 cup fresh blueberries"),
    "Banana": ("banana", "3 ripe bananas, mashed"),
    "Chocolate Chip": ("chocolate", "1 cup chocolate chips"),
    "Oatmeal Raisin": ("raisin", "1 cup raisins"),
    "Pumpkin": ("pumpkin", "1 cup pumpkin puree"),
    "Lemon": ("lemon", "2 tablespoons lemon zest"),
    "Peanut Butter": ("peanut", "1/2 cup creamy peanut butter"),
    "Cranberry Orange": ("cranberry", "1 cup fresh cranberries"),
    "Apple Cinnamon": ("apple", "2 apples, peeled and diced"),
    "Coconut": ("coconut", "1 cup shredded coconut"),
}
for fname, (fnoun, fline) in BAKE_FLAVOR.items():
    for kind, (vessel, mins, temp) in BAKED.items():
        mins = mins + rng.choice([-3, 0, 2, 5])
        ingr = ["2 cups all-purpose flour", "1 cup white sugar", "1/2 cup butter, softened", "2 large eggs",
                "1 teaspoon baking soda", "1 teaspoon vanilla extract", fline]
        if rng.random() < 0.5:
            ingr.append("1/2 cup milk")
        steps = [
            f"Preheat the oven to {temp} degrees F and grease a {vessel}.",
            "Cream the butter and sugar in a large bowl until fluffy.",
            "Beat in the eggs and vanilla.",
            "Mix the flour and baking soda in a separate bowl and stir into the butter mixture.",
            f"Fold in the {fnoun}.",
            f"Spread the batter into the {vessel.split()[-1]} and bake for {mins} minutes.",
            "Cool before serving.",
        ]
        emit(f"{fname} {kind}", ingr, steps)

FRUITS = ["banana", "strawberry", "mango", "blueberry", "pineapple", "peach", "raspberry", "kiwi", "cherry"]
FRUIT_LINE = {
    "banana": "1 frozen banana", "strawberry": "1 cup frozen strawberries", "mango": "1 cup mango chunks",
    "blueberry": "1/2 cup blueberries", "pineapple": "1 cup pineapple chunks", "peach": "1 peach, sliced",
    "raspberry": "1/2 cup raspberries", "kiwi": "2 kiwis, peeled", "cherry": "1 cup pitted cherries",
}
LIQ = {"yogurt": "1/2 cup plain yogurt", "milk": "1 cup almond milk", "juice": "1 cup orange juice"}
done = set()
while len(done) < 24:
    f1, f2 = sorted(pick(FRUITS, 2))
    liq = rng.choice(list(LIQ))
    if (f1, f2, liq) in done:
        continue
    done.add((f1, f2, liq))
    ingr = [FRUIT_LINE[f1], FRUIT_LINE[f2], LIQ[liq], "1 tablespoon honey", "1/2 cup ice"]
    steps = [
        f"Place the {f1} and {f2} in a blender.",
        f"Add the {liq}, honey and ice.",
        "Blend on high speed until smooth, about 1 minute.",
        "Pour into glasses and serve cold.",
    ]
    emit(f"{f1.capitalize()} {f2.capitalize()} Smoothie with {liq.capitalize()}", ingr, steps)

SPIRITS = {"vodka": "2 ounces vodka", "rum": "2 ounces white rum", "gin": "1 1/2 ounces gin",
           "tequila": "2 ounces tequila"}
MIXERS = {"orange": ("orange juice", "4 ounces orange juice"), "cranberry": ("cranberry juice", "3 ounces cranberry juice"),
          "pineapple": ("pineapple juice", "3 ounces pineapple juice"), "grapefruit": ("grapefruit juice", "4 ounces grapefruit juice"),
          "lime": ("lime juice", "1 ounce fresh lime juice")}
for spirit, sline in SPIRITS.items():
    for mname, (mtext, mline) in MIXERS.items():
        garnish = rng.choice(["mint", "lime", "orange", "cherry"])
        ingr = [sline, mline, "1 cup ice", {"mint": "1 sprig fresh mint", "cherry": "1 maraschino cherry"}.get(garnish, f"1 {garnish} wedge for garnish")]
        steps = [
            "Fill a cocktail shaker with ice.",
            f"Combine the {spirit} and {mtext} in the shaker and shake well.",
            "Strain into a chilled glass over fresh ice.",
            f"Garnish with the {garnish} and serve.",
        ]
        emit(f"{spirit.capitalize()} {mname.capitalize()} Cooler", ingr, steps)

ROAST = ["potato", "carrot", "brussels sprout", "beet", "parsnip", "cauliflower", "sweet potato", "asparagus", "broccoli", "squash"]
ROAST_HERB = ["rosemary", "thyme", "sage", "oregano"]
for veg in ROAST:
    for herb in rng.sample(ROAST_HERB, 2):
        temp = rng.choice(["400", "425"])
        mins = rng.choice([20, 25, 30, 35])
        noun = veg.split()[-1]
        plural = noun + ("es" if noun.endswith("o") else "" if noun in ("asparagus", "broccoli", "cauliflower", "squash") else "s")
        vline = f"2 pounds {' '.join(veg.split()[:-1] + [plural])}".replace("  ", " ")
        ingr = [vline, "3 tablespoons olive oil", f"1 tablespoon chopped fresh {herb}",
                "1 teaspoon kosher salt", "1/2 teaspoon black pepper"]
        if rng.random() < 0.5:
            ingr.append("2 tablespoons grated parmesan cheese")
        steps = [
            f"Preheat the oven to {temp} degrees F.",
            f"Toss the {noun} with the oil, {herb}, salt and pepper in a large bowl.",
            "Spread in a single layer on a baking sheet.",
            f"Roast for {mins} minutes, turning halfway through, until golden.",
            "Transfer to a platter and serve.",
        ]
        emit(f"Roasted {veg.title()} with {herb.capitalize()}", ingr, steps)

OMELET_FILL = {"cheddar": "1/4 cup shredded cheddar cheese", "spinach": "1 cup fresh spinach",
               "ham": "1/4 cup diced ham", "mushroom": "1/2 cup sliced mushrooms", "tomato": "1 tomato, diced",
               "onion": "1/4 cup diced onion", "pepper": "1/2 green bell pepper, diced", "bacon": "2 slices bacon, cooked and crumbled"}
done = set()
while len(done) < 20:
    a, b = sorted(pick(list(OMELET_FILL), 2))
    if (a, b) in done:
        continue
    done.add((a, b))
    ingr = ["3 eggs", "2 tablespoons milk", OMELET_FILL[a], OMELET_FILL[b], "1 tablespoon butter", "salt and pepper to taste"]
    steps = [
        "Whisk the eggs and milk in a bowl with salt and pepper.",
        "Melt the butter in a nonstick skillet over medium heat.",
        "Pour in the egg mixture and cook until the edges set.",
        f"Scatter the {a} and {b} over one half of the omelet.",
        "Fold the omelet in half and cook for 1 more minute.",
        "Slide onto a plate and serve.",
    ]
    emit(f"{a.capitalize()} and {b.capitalize()} Omelet", ingr, steps)

CURRY = {"chicken": "1 1/2 pounds chicken thighs, cubed", "chickpea": "2 (15 ounce) cans chickpeas, drained",
         "lamb": "1 pound lamb shoulder, cubed", "potato": "3 potatoes, cubed", "lentil": "1 cup brown lentils",
         "shrimp": "1 pound shrimp, peeled"}
CURRY_STYLE = {"Coconut": ("coconut", "1 (13.5 ounce) can coconut milk"), "Tomato": ("tomato", "1 (14 ounce) can diced tomatoes"),
               "Spinach": ("spinach", "4 cups fresh spinach")}
for main, mline in CURRY.items():
    for style, (snoun, sline) in CURRY_STYLE.items():
        mins = rng.choice([20, 25, 30])
        ingr = [mline, sline, "1 onion, chopped", "3 cloves garlic, minced", "1 tablespoon grated ginger",
                "2 tablespoons curry powder", "1 tablespoon vegetable oil"]
        steps = [
            "Heat the oil in a large pot over medium heat.",
            "Cook the onion, garlic and ginger until fragrant, about 4 minutes.",
            "Stir in the curry powder and cook for 1 minute.",
            f"Add the {main} and the {snoun}.",
            f"Cover and simmer for {mins} minutes, stirring occasionally.",
            "Serve with rice and naan.",
        ]
        emit(f"{style} {main.capitalize()} Curry", ingr, steps)

for i, r in enumerate(recipes):
    r["id"] = f"r{i:04d}"

# Low-quality records that the preprocessing filters must reject.
bad = [
    {"title": "Plain Toast", "ingredients": ["1 slice bread"],
     "instructions": "Toast the bread in a toaster until golden brown. Serve with butter on the side while it is still warm and crisp."},
    {"title": "Salted Water", "ingredients": ["4 cups water", "1 teaspoon salt"],
     "instructions": "Stir the salt into the water until it dissolves completely and use it for boiling pasta or blanching green vegetables."},
    {"title": "Quick Dip", "ingredients": ["1 cup sour cream", "1 packet onion soup mix"],
     "instructions": "Mix together. Chill."},
    {"title": "Nutrition Facts Salad", "ingredients": ["2 cups lettuce", "1 tomato, diced", "Calories: 45 per serving"],
     "instructions": "Toss the lettuce with the tomato in a bowl. Serve immediately with your favorite dressing on the side for dipping."},
    {"title": "Grandma's Cake", "ingredients": ["2 cups flour", "1 cup sugar", "3 eggs"],
     "instructions": "Mix the flour, sugar and eggs in a bowl. Bake at 350 degrees F for 30 minutes until golden. Submitted by Grandma Jones for the church cookbook."},
    {"title": "Just Butter", "ingredients": ["1/2 cup", "1 stick butter"],
     "instructions": "Melt the butter slowly in a small saucepan over low heat. Pour it over popcorn or vegetables and serve right away."},
    {"title": "Ice Cubes", "ingredients": [],
     "instructions": "Fill the tray with water. Freeze until solid, at least four hours, then pop the cubes out and store them in a bag."},
    {"title": "Lemon Water", "ingredients": ["1 lemon, sliced", "2 cups water"],
     "instructions": "Drop the lemon slices into the water and let them steep in the refrigerator for an hour before serving cold"},
]
for i, r in enumerate(bad):
    r["id"] = f"x{i:03d}"

rng.shuffle(recipes)
with open("recipes.jsonl", "w", encoding="utf-8") as f:
    for r in recipes + bad:
        f.write(json.dumps({"id": r["id"], "title": r["title"], "ingredients": r["ingredients"],
                            "instructions": r["instructions"]}, ensure_ascii=False) + "\n")
print(len(recipes), "recipes +", len(bad), "rejects")
